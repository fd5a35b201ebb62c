"""Error-bound curves for single-state learning.

With N = |G| = Theta(n) samples the reachable error is the inverse of the
sample complexity at n.  For power-law interactions the exponent omega follows
from (alpha, D, k); the bound is evaluated exactly through Lambert W and
compared with its asymptotic form.
"""

from equilearn.theory import (
    compute_omega,
    error_bound_power_law,
    error_bound_short_range,
    fit_bound,
    sample_complexity_power_law,
)

params = compute_omega(3, 1, 2)
print(f"alpha=3, D=1, k=2: nu = {params.nu}, omega = {params.omega} ~ {float(params.omega):.4f}")

print("\n  log2 n   exact eps   asymptotic   round trip n")
for e in (10, 20, 40, 80):
    n = 2.0**e
    eps = error_bound_power_law(n, params.omega)
    asym = error_bound_power_law(n, params.omega, form="asymptotic")
    back = sample_complexity_power_law(eps, params.omega)
    print(f"  {e:6d}   {eps:.6f}    {asym:.6f}     {back / n:.12f} n")

sizes = [6, 8, 10, 12]
errors = [0.52, 0.47, 0.43, 0.41]
curve = fit_bound(sizes, errors, "short_range")
print(f"\nshort-range fit to {errors}: c = {curve.c:.4f}, d = {curve.d}, "
      f"rms log residual {curve.residual:.4f}")
print("extrapolated: " + ", ".join(f"n={n}: {error_bound_short_range(n, curve.c, curve.d):.3f}"
                                   for n in (64, 1024)))
