"""Predict the normalized energy H(x)/sqrt(n) from a single ground state.

One solve at x0 feeds every orbit-class model.  The learned predictor is then
compared with exact solves at fresh parameters and with the trivial predictor
that always answers E0(x0)/sqrt(n).
"""

import numpy as np

from equilearn.learning import fit_observable
from equilearn.models import energy_observable, long_range_ising_ring, sample_params
from equilearn.quantum import solve

n = 10
spec = long_range_ising_ring(n, alpha=3.0)
x0 = sample_params(spec, 1)
gs = solve(spec, x0)
obs = energy_observable(spec)
model = fit_observable(spec, x0, gs, obs)

print(f"{len(model.models)} orbit-class models (one field class, {n // 2} pair distances)")
for rep, m in model.models.items():
    print(f"  {str(rep):8s} rows={m.n_rows:3d} lambda={m.lam:.2e} cv_rmse={m.cv_rmse:.4f} "
          f"sparsity={m.sparsity:.2f}")

rng = np.random.default_rng(123)
exact, pred = [], []
for _ in range(15):
    x = sample_params(spec, rng)
    exact.append(solve(spec, x).energy / np.sqrt(n))
    pred.append(model.predict(x))
exact, pred = np.array(exact), np.array(pred)
trivial = gs.energy / np.sqrt(n)

print(f"\nml rmse      {np.sqrt(np.mean((pred - exact) ** 2)):.4f}")
print(f"trivial rmse {np.sqrt(np.mean((trivial - exact) ** 2)):.4f}")
print(f"test std     {exact.std():.4f}")
