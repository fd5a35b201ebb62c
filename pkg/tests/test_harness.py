import time

import numpy as np
import pytest

from equilearn.errors import ConfigurationError, FitError, SweepError
from equilearn.harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    SweepResult,
    emit_results,
    overlay_bounds,
    read_results,
    run_correlation_sweep,
    run_energy_sweep,
)
from equilearn.learning import OrbitModel, fit_observable
from equilearn.models import (
    ObservableSpec,
    energy_observable,
    long_range_ising_ring,
    sample_params,
)
from equilearn.quantum import solve
from equilearn.theory import error_bound_short_range

SMOKE = dict(n_values=(6,), seeds=(0,), test_points=5)


@pytest.fixture(scope="module")
def energy_result():
    return run_energy_sweep(ExperimentConfig(**SMOKE))


def test_energy_smoke(energy_result):
    rows = energy_result.rows
    assert len(rows) == 1
    r = rows[0]
    assert r["target"] == "energy" and r["distance"] is None
    assert np.isfinite(r["ml_rmse"]) and r["trivial_rmse"] >= 0 and r["test_std"] >= 0
    assert r["wall_ms"] is None


def test_single_training_solve_per_cell(energy_result):
    for cell in energy_result.metadata["cells"]:
        assert cell["solves"]["training"] == 1
        assert cell["solves"]["test"] == 5


def test_csv_schema_and_round_trip(energy_result, tmp_path):
    path = emit_results(energy_result, tmp_path / "out" / "energy.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[0] == "family,n,seed,target,distance,ml_rmse,trivial_rmse,test_std,wall_ms"
    assert path.with_suffix(".json").exists()
    assert read_results(path) == energy_result.rows


def test_empty_result_is_header_only():
    text = SweepResult(ExperimentConfig(), []).to_csv()
    assert text == ",".join(CSV_COLUMNS) + "\n"


def test_emit_reports_path(energy_result, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        emit_results(energy_result, blocker / "x.csv")


def test_determinism(energy_result):
    again = run_energy_sweep(ExperimentConfig(**SMOKE))
    assert again.to_csv() == energy_result.to_csv()


def test_timing_column_optional():
    res = run_energy_sweep(ExperimentConfig(**SMOKE, record_timing=True))
    assert res.rows[0]["wall_ms"] > 0


def test_config_validation_and_round_trip(tmp_path):
    cfg = ExperimentConfig(family="long_range_ising", n_values=(6, 8), seeds=(1,))
    again = ExperimentConfig.from_dict(cfg.to_dict())
    assert again == cfg and again.digest() == cfg.digest()
    for bad in (dict(seeds=()), dict(test_points=1), dict(n_values=(16,)),
                dict(target="x"), dict(source="y")):
        with pytest.raises(ConfigurationError):
            ExperimentConfig(**bad).validate()
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigurationError):
        run_energy_sweep(ExperimentConfig(target="all_correlations"))


def test_too_many_skipped_points():
    # all couplings zero: every test Hamiltonian is degenerate
    cfg = ExperimentConfig(**SMOKE, ranges={"J": (0.0, 0.0)})
    with pytest.raises(SweepError):
        run_energy_sweep(cfg)


def test_correlation_sweep_rows():
    res = run_correlation_sweep(ExperimentConfig(target="all_correlations", n_values=(6,),
                                                 seeds=(0,), test_points=3))
    assert [r["distance"] for r in res.rows] == [1, 2, 3]
    for r in res.rows:
        assert 0 <= r["ml_rmse"] <= 2
    assert res.metadata["cells"][0]["classes"] == 3


def test_shadow_source_sweep_runs():
    res = run_correlation_sweep(ExperimentConfig(target="all_correlations", source="shadow",
                                                 shadow_T=500, n_values=(6,), seeds=(0,),
                                                 test_points=3))
    assert res.metadata["cells"][0]["shadow_T"] == 500
    assert all(np.isfinite(r["ml_rmse"]) for r in res.rows)


def test_overlay_recovers_synthetic_curve():
    rows = [{"n": n, "distance": None, "ml_rmse": error_bound_short_range(n, 0.4, 1)}
            for n in (6, 8, 10, 12) for _ in range(2)]
    curve, text = overlay_bounds(rows, "short_range")
    lines = text.splitlines()
    assert lines[0] == "n,measured,fitted_bound"
    for line in lines[1:]:
        _, measured, fitted = map(float, line.split(","))
        assert fitted == pytest.approx(measured, rel=1e-6)
    with pytest.raises(FitError):
        overlay_bounds(rows[:1], "short_range")


def test_overlay_power_law(energy_result):
    rows = [dict(r, n=n) for n in (6, 8) for r in energy_result.rows]
    rows[0]["ml_rmse"] *= 1.5
    curve, text = overlay_bounds(rows, "power_law", {"omega": 864 / 83})
    assert curve.c > 0 and len(text.splitlines()) == 3


def test_prediction_cost_linear_in_terms(monkeypatch):
    """Model evaluations grow linearly with the number of observable terms."""
    n = 12
    spec = long_range_ising_ring(n)
    x0 = sample_params(spec, 0)
    full = energy_observable(spec)
    model = fit_observable(spec, x0, solve(spec, x0), full)
    # observables made of whole distance classes: d = 1 (n terms) and d in {1, 2} (2n terms)
    by_dist = {}
    for t in full.terms:
        if len(t.sites) == 2:
            i, j = t.sites
            by_dist.setdefault(min(j - i, n - (j - i)), []).append(t)
    small = ObservableSpec(tuple(by_dist[1]), 1.0)
    large = ObservableSpec(tuple(by_dist[1] + by_dist[2]), 1.0)
    assert len(large.terms) == 2 * len(small.terms)

    rows = []
    original = OrbitModel.predict_patches

    def counting(self, patches):
        rows.append(len(patches))
        return original(self, patches)

    monkeypatch.setattr(OrbitModel, "predict_patches", counting)
    from equilearn.learning import predict_observable

    x = sample_params(spec, 1)
    predict_observable(model.models, x, small)
    ops_small = sum(rows)
    rows.clear()
    predict_observable(model.models, x, large)
    assert sum(rows) == 2 * ops_small
    monkeypatch.setattr(OrbitModel, "predict_patches", original)

    def per_term_time(obs, reps=200):
        best = np.inf
        for _ in range(5):
            t0 = time.perf_counter()
            for _ in range(reps):
                predict_observable(model.models, x, obs)
            best = min(best, time.perf_counter() - t0)
        return best / len(obs.terms)

    assert per_term_time(large) <= 1.5 * per_term_time(small)
