import json
import subprocess
import sys


from equilearn.cli import main


def write_config(tmp_path, **overrides):
    doc = {"n_values": [6], "seeds": [0, 1], "test_points": 3}
    doc.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


def test_theory_table(capsys):
    assert main(["theory", "--log2-min", "10", "--log2-max", "20", "--log2-step", "10"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("# omega = 864/83")
    assert out[1] == "n,epsilon_exact,epsilon_asymptotic"
    assert [line.split(",")[0] for line in out[2:]] == ["1024", "1048576"]


def test_theory_domain_error(capsys):
    assert main(["theory", "--alpha", "2"]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "DomainError"


def test_sweep_energy_and_fit(tmp_path, capsys):
    cfg = write_config(tmp_path, n_values=[6, 8])
    out = tmp_path / "res"
    assert main(["sweep-energy", "--config", str(cfg), "--seed", "3", "--out", str(out)]) == 0
    csv_path = out / "energy.csv"
    lines = csv_path.read_text().splitlines()
    assert len(lines) == 3
    assert all(line.split(",")[2] == "3" for line in lines[1:])
    capsys.readouterr()
    assert main(["fit-bounds", "--results", str(csv_path), "--kind", "short_range",
                 "--out", str(out)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["c"] > 0
    assert (out / "bounds_short_range.csv").read_text().startswith("n,measured,fitted_bound")


def test_sweep_correlations(tmp_path):
    cfg = write_config(tmp_path, seeds=[0])
    assert main(["sweep-correlations", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "correlations.csv").read_text().splitlines()
    assert len(lines) == 4


def test_shadow_cache(tmp_path):
    cfg = write_config(tmp_path, shadow_T=20)
    assert main(["shadow-cache", "--config", str(cfg), "--seed", "0", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "shadow_heisenberg_n6_seed0.json").read_text())
    assert doc["shadow"]["T"] == 20 and len(doc["x0"]) == 6


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, n_values=[20])
    assert main(["sweep-energy", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigurationError"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "equilearn", "theory", "--log2-min", "10",
                           "--log2-max", "10"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "864/83" in proc.stdout


def test_missing_results_file(tmp_path, capsys):
    assert main(["fit-bounds", "--results", str(tmp_path / "none.csv")]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "FileNotFoundError"
