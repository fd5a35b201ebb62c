"""Learn two-point correlations from classical shadows of one ground state.

The training state is never read directly: only randomized Pauli measurement
records are used.  Each pair class gets 15 Pauli models that together predict
the two-site reduced density matrix, from which C_ij = <X X + Y Y + Z Z>/3
follows.
"""

from equilearn.learning import fit_pair_rdm_models
from equilearn.models import heisenberg_ring, sample_params
from equilearn.quantum import reduced_density_matrix, solve
from equilearn.shadows import estimate_correlation, measure_shadow

n = 8
spec = heisenberg_ring(n)
x0 = sample_params(spec, 2)
gs = solve(spec, x0)

record = measure_shadow(gs.state, 5000, rng_seed=0)
print(f"shadow record: {record.T} snapshots of {record.n} qubits")
for i, j in [(0, 1), (0, 2), (0, 4)]:
    rho = reduced_density_matrix(gs.state, (i, j))
    exact = (2 * (rho[0, 0] + rho[3, 3] + 2 * rho[1, 2].real) - 1).real / 3
    print(f"  C_{i}{j}: shadow {estimate_correlation(record, i, j): .4f}  exact {exact: .4f}")

models = fit_pair_rdm_models(spec, x0, gs, source=record)
x = sample_params(spec, 99)
test = solve(spec, x)
print("\nheld-out parameters")
print("  pair   predicted   exact")
for (i, j) in [(0, 1), (3, 4), (1, 3), (2, 6)]:
    owner = next(m for m in models.values() if (i, j) in m.layout.member_elements)
    rho = reduced_density_matrix(test.state, (i, j))
    exact = (2 * (rho[0, 0] + rho[3, 3] + 2 * rho[1, 2].real) - 1).real / 3
    print(f"  {i},{j}   {owner.predict_correlation(x, i, j): .4f}    {exact: .4f}")
