"""Error-bound theory: the power-law exponent omega, Lambert W, and bound curves.

Single-ground-state learning uses ``N = |G| = Theta(n)`` samples, so the
achievable error is the inverse of the sample complexity evaluated at ``n``.
Two regimes are covered:

* short range / exponential decay: ``eps = 2^{-c (log2 n)^{1/d}}``
* power law with exponent ``alpha > 2D``: ``eps`` solves
  ``exp(c eps^{-omega} ln(1/eps)) = n``, i.e.
  ``eps = (W(u) / u)^{1/omega}`` with ``u = (omega / c) ln n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np
from scipy.optimize import least_squares

from .errors import DomainError, FitError

__all__ = [
    "OmegaParams",
    "BoundCurve",
    "compute_omega",
    "lambert_w",
    "error_bound_power_law",
    "error_bound_short_range",
    "sample_complexity_power_law",
    "fit_bound",
]


@dataclass(frozen=True)
class OmegaParams:
    alpha: object
    D: int
    k: int
    epsilon_aux: object
    alpha_prime: object
    beta: object
    eta: object
    nu: object
    omega: object

    @property
    def exact(self):
        return isinstance(self.omega, Fraction)


def _omega_chain(alpha, D, k):
    a2 = alpha - 2 * D
    eps = (a2 * a2) / (2 * (a2 * a2 + alpha - D))
    alpha_p = a2 - eps
    beta = (alpha - D) / a2 - eps / 2
    eta = a2 / (2 * (2 * alpha - 2 * D - 1))
    nu = alpha_p * (beta * (1 - eta) - eta)
    return eps, alpha_p, beta, eta, nu


def compute_omega(alpha, D=1, k=2, exact=None):
    """Exponent ``omega = k D / (nu - D)`` of the power-law sample complexity.

    Rational inputs (ints, :class:`~fractions.Fraction`) are evaluated in exact
    rational arithmetic unless ``exact=False``.

    >>> compute_omega(3, 1, 2).omega
    Fraction(864, 83)
    """
    if D < 1 or k < 1:
        raise DomainError(f"need D >= 1 and k >= 1, got D={D}, k={k}")
    if exact is None:
        exact = isinstance(alpha, Rational)
    alpha = Fraction(alpha) if exact else float(alpha)
    if not alpha > 2 * D:
        raise DomainError(f"power-law bound needs alpha > 2D, got alpha={alpha}, D={D}")
    eps, alpha_p, beta, eta, nu = _omega_chain(alpha, D, k)
    if not nu > D:
        raise DomainError(f"nu={nu} <= D={D}: the bound degenerates")
    omega = Fraction(k * D) / (nu - D) if exact else k * D / (nu - D)
    return OmegaParams(alpha, D, k, eps, alpha_p, beta, eta, nu, omega)


_INV_E = math.exp(-1.0)


def lambert_w(x, tol=1e-15, max_iter=100):
    """Principal branch ``W(x)`` of the Lambert W function for real ``x >= -1/e``.

    Halley iteration on ``w e^w - x`` from a branch-point series (near
    ``-1/e``), ``log1p`` (moderate ``x``) or ``log x - log log x`` (large ``x``).
    """
    x = float(x)
    if math.isnan(x):
        return math.nan
    if x < -_INV_E:
        # allow rounding of -1/e itself
        if x < -_INV_E * (1 + 1e-15):
            raise DomainError(f"W(x) is real only for x >= -1/e, got {x}")
        x = -_INV_E
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    if x < -0.25:
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif x < 3.0:
        w = math.log1p(x) * (1 - math.log1p(math.log1p(x)) / (2 + math.log1p(x)))
    else:
        lx = math.log(x)
        w = lx - math.log(lx)
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        step = f / denom
        w -= step
        if abs(step) <= tol * (1.0 + abs(w)):
            break
    return w


def _check_power_law(n, omega, c):
    if not (omega > 0 and c > 0):
        raise DomainError(f"omega and c must be positive, got omega={omega}, c={c}")
    if not n > 1:
        raise DomainError(f"n must exceed 1, got {n}")


def error_bound_power_law(n, omega, c=1.0, form="exact"):
    """Error reachable with ``Theta(n)`` samples under power-law interactions.

    ``form="exact"`` inverts ``n = exp(c eps^{-omega} ln(1/eps))`` through the
    Lambert W function; ``form="asymptotic"`` uses ``W(u) ~ ln u`` and returns
    ``c^{1/omega} (ln(omega ln n) / (omega ln n))^{1/omega}``.  Natural logs.
    """
    omega = float(omega)
    _check_power_law(n, omega, c)
    ln_n = math.log(n)
    if form == "exact":
        u = omega / c * ln_n
        return (lambert_w(u) / u) ** (1.0 / omega)
    if form == "asymptotic":
        v = omega * ln_n
        if v <= math.e:
            raise DomainError(f"asymptotic form needs omega*ln(n) > e, got {v}")
        return c ** (1.0 / omega) * (math.log(v) / v) ** (1.0 / omega)
    raise ValueError(f"unknown form {form!r}")


def sample_complexity_power_law(eps, omega, c=1.0):
    """``exp(c eps^{-omega} ln(1/eps))``, the sample count matching error ``eps``."""
    return math.exp(c * eps ** (-float(omega)) * math.log(1.0 / eps))


def error_bound_short_range(n, c=1.0, d=1):
    """``2^{-c (log2 n)^{1/d}}`` for short-range or exponentially decaying interactions."""
    if n < 2 or c <= 0 or d < 1:
        raise DomainError(f"need n >= 2, c > 0, d >= 1; got n={n}, c={c}, d={d}")
    return 2.0 ** (-c * math.log2(n) ** (1.0 / d))


@dataclass(frozen=True)
class BoundCurve:
    kind: str
    c: float
    d: int | None = None
    omega: float | None = None
    form: str = "exact"
    residual: float = 0.0

    def __call__(self, n):
        if self.kind == "short_range":
            return error_bound_short_range(n, self.c, self.d)
        return error_bound_power_law(n, self.omega, self.c, self.form)


def fit_bound(sizes, errors, curve_kind, fixed_params=None, max_d=6):
    """Least-squares fit of a bound curve to measured errors in log-error space.

    ``short_range`` fits ``c`` (and the integer ``d`` by scanning ``1..max_d``
    unless ``fixed_params["d"]`` is given); ``power_law`` needs
    ``fixed_params["omega"]`` and fits ``c``.  Returns a :class:`BoundCurve`
    whose ``residual`` is the RMS residual of ``ln eps``.
    """
    fixed_params = dict(fixed_params or {})
    sizes = np.asarray(sizes, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if sizes.shape != errors.shape or len(sizes) < 2:
        raise FitError("need at least two (size, error) pairs")
    if np.any(errors <= 0):
        raise FitError("errors must be positive for a log-space fit")
    if len(np.unique(sizes)) < 2:
        raise FitError("all sizes are equal; the bound cannot be fitted")
    log_err = np.log(errors)

    if curve_kind == "short_range":
        ds = [int(fixed_params["d"])] if "d" in fixed_params else range(1, max_d + 1)
        best = None
        for d in ds:
            # ln eps = -c ln2 (log2 n)^{1/d}: linear in c
            a = -math.log(2) * np.log2(sizes) ** (1.0 / d)
            c = float(a @ log_err / (a @ a))
            if c <= 0:
                continue
            res = float(np.sqrt(np.mean((a * c - log_err) ** 2)))
            if best is None or res < best.residual:
                best = BoundCurve("short_range", c, d, residual=res)
        if best is None:
            raise FitError("no positive constant fits the data (errors grow with n)")
        return best

    if curve_kind == "power_law":
        if "omega" not in fixed_params:
            raise FitError("power-law fit needs fixed_params['omega']")
        omega = float(fixed_params["omega"])
        form = fixed_params.get("form", "exact")
        if form == "asymptotic":
            # ln eps = ln(c)/omega + g(n): closed form
            g = np.array([math.log(error_bound_power_law(n, omega, 1.0, "asymptotic"))
                          for n in sizes])
            ln_c = float(omega * np.mean(log_err - g))
            c = math.exp(ln_c)
            res = float(np.sqrt(np.mean((ln_c / omega + g - log_err) ** 2)))
            return BoundCurve("power_law", c, omega=omega, form=form, residual=res)

        def resid(p):
            c = math.exp(p[0])
            return [math.log(error_bound_power_law(n, omega, c)) - le
                    for n, le in zip(sizes, log_err)]

        start = [0.0]
        sol = least_squares(resid, start, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        c = float(math.exp(sol.x[0]))
        res = float(np.sqrt(np.mean(np.square(sol.fun))))
        return BoundCurve("power_law", c, omega=omega, form=form, residual=res)

    raise ValueError(f"unknown curve kind {curve_kind!r}")
