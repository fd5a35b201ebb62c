"""Scaling sweeps: train on one ground state per (n, seed), test on fresh parameters.

Each (n, seed) cell samples ``x0``, solves ``H(x0)`` once, trains the orbit
models from that single state and compares predictions against exact solves at
``test_points`` fresh parameter draws.  Alongside the model RMSE every cell
reports the trivial predictor (always answer with the training value) and the
standard deviation of the exact test values, all over the same test set.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigurationError, ConvergenceError, DegeneracyWarning, SweepError
from .lattice import build_group
from .learning import LearnerConfig, fit_observable, fit_pair_rdm_models
from .models import energy_observable, sample_params, spec_from_dict
from .quantum import MAX_QUBITS, build_hamiltonian, ground_state, reduced_density_matrix
from .shadows import TWO_SITE_PAULIS, estimate_correlation, measure_shadow, shadow_count
from .theory import fit_bound

__all__ = [
    "ExperimentConfig",
    "SweepResult",
    "run_energy_sweep",
    "run_correlation_sweep",
    "emit_results",
    "read_results",
    "overlay_bounds",
    "CSV_COLUMNS",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = ("family", "n", "seed", "target", "distance", "ml_rmse", "trivial_rmse",
               "test_std", "wall_ms")


@dataclass(frozen=True)
class ExperimentConfig:
    family: str = "heisenberg"
    alpha: float = 3.0
    ranges: dict | None = None
    n_values: tuple = (6, 8, 10, 12)
    seeds: tuple = (0, 1, 2, 3, 4)
    target: str = "energy"
    source: str = "exact"
    shadow_C: float = 50.0
    shadow_T: int | None = None
    learner: LearnerConfig = LearnerConfig()
    test_points: int = 20
    include_reflections: bool = True
    rdm_labels: str = "all"
    solver_tol: float = 1e-10
    max_skip_fraction: float = 0.2
    workers: int = 1
    record_timing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if isinstance(self.learner, dict):
            object.__setattr__(self, "learner", LearnerConfig.from_dict(self.learner))

    def validate(self):
        if not self.seeds:
            raise ConfigurationError("seeds must be non-empty")
        if self.test_points < 2:
            raise ConfigurationError("need at least two test points")
        for n in self.n_values:
            if not 3 <= n <= MAX_QUBITS:
                raise ConfigurationError(f"n={n} outside the solver range [3, {MAX_QUBITS}]")
        if self.target not in ("energy", "all_correlations"):
            raise ConfigurationError(f"unknown target {self.target!r}")
        if self.source not in ("exact", "shadow"):
            raise ConfigurationError(f"unknown source {self.source!r}")
        if self.rdm_labels not in ("all", "correlation"):
            raise ConfigurationError(f"unknown rdm_labels {self.rdm_labels!r}")
        return self

    def model_spec(self, n):
        return spec_from_dict({"family": self.family, "n": n, "alpha": self.alpha,
                               "ranges": self.ranges})

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["n_values"] = list(self.n_values)
        d["seeds"] = list(self.seeds)
        d["learner"] = self.learner.to_dict()
        return d

    @classmethod
    def from_dict(cls, doc):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def digest(self):
        text = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class SweepResult:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def column(self, name, n=None, distance=None):
        return np.array([r[name] for r in self.rows
                         if (n is None or r["n"] == n)
                         and (distance is None or r["distance"] == distance)], dtype=float)

    def median(self, name, n, distance=None):
        return float(np.median(self.column(name, n, distance)))

    def mean(self, name, n, distance=None):
        return float(np.mean(self.column(name, n, distance)))

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
        return buf.getvalue()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _seed(*keys):
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


# stream tags for per-cell random draws
_X0, _SOLVER, _SHADOW, _TESTS, _TEST_SOLVER, _LEARNER = range(6)


class _Solver:
    """Ground-state solves for one cell, counted by role."""

    def __init__(self, config, spec, seed):
        self.config = config
        self.spec = spec
        self.seed = seed
        self.counts = {"training": 0, "test": 0}

    def __call__(self, x, role, k=0):
        self.counts[role] += 1
        tag = _SOLVER if role == "training" else _TEST_SOLVER
        H = build_hamiltonian(self.spec, x)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegeneracyWarning)
            return ground_state(H, tol=self.config.solver_tol,
                                rng_seed=_seed(self.seed, self.spec.n, tag, k))


def _test_points(config, spec, seed, solver, evaluate):
    """Exact values at fresh parameters; degenerate or unconverged points are skipped."""
    rng = np.random.default_rng(_seed(seed, spec.n, _TESTS))
    xs, values, skipped = [], [], 0
    for k in range(config.test_points):
        x = sample_params(spec, rng)
        try:
            gs = solver(x, "test", k)
        except ConvergenceError as exc:
            log.warning("n=%d seed=%d test point %d skipped: %s", spec.n, seed, k, exc)
            skipped += 1
            continue
        if gs.degenerate:
            log.warning("n=%d seed=%d test point %d skipped: degenerate ground state",
                        spec.n, seed, k)
            skipped += 1
            continue
        xs.append(x)
        values.append(evaluate(gs))
    if skipped > config.max_skip_fraction * config.test_points:
        raise SweepError(f"n={spec.n} seed={seed}: {skipped} of {config.test_points} "
                         "test points skipped")
    return xs, values, skipped


def _learner(config, n, seed):
    return dataclasses.replace(config.learner, seed=_seed(config.learner.seed, seed, n, _LEARNER))


def _rmse(a, b):
    return float(np.sqrt(np.mean((np.asarray(a) - np.asarray(b)) ** 2)))


def _energy_cell(config, n, seed):
    t0 = time.perf_counter()
    spec = config.model_spec(n)
    group = build_group(n, config.include_reflections)
    solver = _Solver(config, spec, seed)
    x0 = sample_params(spec, _seed(seed, n, _X0))
    gs = solver(x0, "training")
    t_solve = time.perf_counter()
    obs = energy_observable(spec)
    source = "exact"
    if config.source == "shadow":
        T = config.shadow_T or shadow_count(n, config.shadow_C)
        source = measure_shadow(gs.state, T, _seed(seed, n, _SHADOW))
    model = fit_observable(spec, x0, gs, obs, _learner(config, n, seed), source, group)
    t_train = time.perf_counter()
    train_value = gs.energy / math.sqrt(n)
    xs, exact, skipped = _test_points(config, spec, seed, solver,
                                      lambda g: g.energy / math.sqrt(n))
    t_tests = time.perf_counter()
    preds = [model.predict(x) for x in xs]
    t_pred = time.perf_counter()
    wall_ms = (t_pred - t0) * 1e3
    row = {
        "family": config.family, "n": n, "seed": seed, "target": "energy", "distance": None,
        "ml_rmse": _rmse(preds, exact),
        "trivial_rmse": _rmse(train_value, exact),
        "test_std": float(np.std(exact)),
        "wall_ms": round(wall_ms, 3) if config.record_timing else None,
    }
    meta = {
        "n": n, "seed": seed, "solves": dict(solver.counts), "skipped_test_points": skipped,
        "training_degenerate": bool(gs.degenerate), "gap": gs.gap_estimate,
        "models": len(model.models),
        "timing_ms": {"solve": (t_solve - t0) * 1e3, "train": (t_train - t_solve) * 1e3,
                      "test_solves": (t_tests - t_train) * 1e3,
                      "predict": (t_pred - t_tests) * 1e3},
    }
    return [row], meta


def _pair_correlations(state, pairs):
    out = []
    for i, j in pairs:
        rho = reduced_density_matrix(state, (i, j))
        # C_ij = (XX + YY + ZZ) / 3 = (2 SWAP - I) / 3
        out.append(float((2 * (rho[0, 0] + rho[3, 3] + 2 * rho[1, 2].real) - 1).real / 3))
    return np.array(out)


def _correlation_cell(config, n, seed):
    t0 = time.perf_counter()
    spec = config.model_spec(n)
    group = build_group(n, config.include_reflections)
    solver = _Solver(config, spec, seed)
    x0 = sample_params(spec, _seed(seed, n, _X0))
    gs = solver(x0, "training")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if config.source == "shadow":
        T = config.shadow_T or shadow_count(n, config.shadow_C)
        source = measure_shadow(gs.state, T, _seed(seed, n, _SHADOW))
        train_values = np.array([estimate_correlation(source, i, j) for i, j in pairs])
    else:
        T = None
        source = "exact"
        train_values = _pair_correlations(gs.state, pairs)
    labels = TWO_SITE_PAULIS if config.rdm_labels == "all" else ("XX", "YY", "ZZ")
    rdm_models = fit_pair_rdm_models(spec, x0, gs, _learner(config, n, seed), source, group,
                                     labels, pairs)
    t_train = time.perf_counter()
    xs, exact, skipped = _test_points(config, spec, seed, solver,
                                      lambda g: _pair_correlations(g.state, pairs))
    t_tests = time.perf_counter()
    owner = {}
    for m in rdm_models.values():
        for J in m.layout.member_elements:
            owner[J] = m
    preds = np.array([[owner[p].predict_correlation(x, *p) for p in pairs] for x in xs])
    t_pred = time.perf_counter()
    exact = np.array(exact)
    dist = np.array([min(j - i, n - (j - i)) for i, j in pairs])
    rows = []
    for d in sorted(set(dist)):
        sel = dist == d
        rows.append({
            "family": config.family, "n": n, "seed": seed, "target": "all_correlations",
            "distance": int(d),
            "ml_rmse": _rmse(preds[:, sel], exact[:, sel]),
            "trivial_rmse": _rmse(np.broadcast_to(train_values[sel], exact[:, sel].shape),
                                  exact[:, sel]),
            "test_std": float(np.std(exact[:, sel])),
            "wall_ms": round((t_pred - t0) * 1e3, 3) if config.record_timing else None,
        })
    meta = {
        "n": n, "seed": seed, "solves": dict(solver.counts), "skipped_test_points": skipped,
        "training_degenerate": bool(gs.degenerate), "gap": gs.gap_estimate,
        "shadow_T": T, "models": sum(len(m.models) for m in rdm_models.values()),
        "classes": len(rdm_models),
        "timing_ms": {"train": (t_train - t0) * 1e3, "test_solves": (t_tests - t_train) * 1e3,
                      "predict": (t_pred - t_tests) * 1e3},
    }
    return rows, meta


def _run_cell(args):
    kind, config, n, seed = args
    fn = _energy_cell if kind == "energy" else _correlation_cell
    return (n, seed), fn(config, n, seed)


def _run(config, kind):
    config.validate()
    jobs = [(kind, config, n, s) for n in config.n_values for s in config.seeds]
    t0 = time.perf_counter()
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = dict(pool.map(_run_cell, jobs))
    else:
        results = dict(_run_cell(j) for j in jobs)
    rows, cells = [], []
    for key in sorted(results):
        cell_rows, meta = results[key]
        rows.extend(cell_rows)
        cells.append(meta)
    metadata = {
        "config_hash": config.digest(),
        "versions": _versions(),
        "wall_s": time.perf_counter() - t0,
        "cells": cells,
    }
    return SweepResult(config, rows, metadata)


def _versions():
    import scipy

    return {"equilearn": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def run_energy_sweep(config: ExperimentConfig):
    """Predict ``H(x)/sqrt(n)`` from one ground state per (n, seed)."""
    if config.target != "energy":
        raise ConfigurationError("run_energy_sweep needs target='energy'")
    return _run(config, "energy")


def run_correlation_sweep(config: ExperimentConfig):
    """Predict every ``C_ij`` via learned two-site RDMs; RMSE is grouped by distance."""
    if config.target != "all_correlations":
        raise ConfigurationError("run_correlation_sweep needs target='all_correlations'")
    return _run(config, "correlations")


def emit_results(result: SweepResult, path):
    """Write the sweep CSV to ``path`` and its provenance JSON next to it."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(result.to_csv())
        meta = {"config": result.config.to_dict(), **result.metadata}
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True,
                                                        default=_json_default))
    except OSError as exc:
        raise OSError(f"could not write results to {path}: {exc}") from exc
    return path


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def read_results(path):
    """Parse a sweep CSV back into row dicts."""
    rows = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            rows.append({
                "family": r["family"], "n": int(r["n"]), "seed": int(r["seed"]),
                "target": r["target"],
                "distance": int(r["distance"]) if r["distance"] else None,
                "ml_rmse": float(r["ml_rmse"]), "trivial_rmse": float(r["trivial_rmse"]),
                "test_std": float(r["test_std"]),
                "wall_ms": float(r["wall_ms"]) if r["wall_ms"] else None,
            })
    return rows


def overlay_bounds(result, curve_kind, fixed_params=None, distance=None):
    """Fit a bound curve to the seed-averaged ``ml_rmse`` against ``n``.

    ``result`` is a :class:`SweepResult` or a list of row dicts.  Returns
    ``(curve, csv_text)`` where the CSV has columns ``n,measured,fitted_bound``.
    """
    rows = result.rows if isinstance(result, SweepResult) else result
    rows = [r for r in rows if distance is None or r["distance"] == distance]
    sizes = sorted({r["n"] for r in rows})
    measured = [float(np.mean([r["ml_rmse"] for r in rows if r["n"] == n])) for n in sizes]
    curve = fit_bound(sizes, measured, curve_kind, fixed_params)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("n", "measured", "fitted_bound"))
    for n, m in zip(sizes, measured):
        writer.writerow((n, repr(m), repr(float(curve(n)))))
    return curve, buf.getvalue()
