import json
import math

import pytest

from oscchain import config as cfgmod
from oscchain.cli import main


def _read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config_hash=") and lines[1].startswith("# seeds=")
    return lines[2].split(","), [l.split(",") for l in lines[3:]]


def test_dispersion(tmp_path):
    assert main(["dispersion", "--config", "s1", "--out", str(tmp_path)]) == 0
    sset = json.loads((tmp_path / "spectral_set.json").read_text())
    assert sset["e1"] == pytest.approx(1.0) and sset["e2"] == pytest.approx(5.0)
    cols, rows = _read_csv(tmp_path / "dispersion.csv")
    assert cols == ["lambda", "omega2"] and len(rows) == 2048
    assert json.loads((tmp_path / "config.json").read_text())["config"]["simulation"]["replicas"] == 2000


def test_dispersion_uncoupled_constant(tmp_path):
    assert main(["dispersion", "--config", "uncoupled", "--out", str(tmp_path)]) == 0
    _, rows = _read_csv(tmp_path / "dispersion.csv")
    assert {r[1] for r in rows} == {"4"}


def test_unpinned_exit_code(tmp_path, capsys):
    assert main(["dispersion", "--config", "unpinned", "--out", str(tmp_path)]) == 3
    assert "PositivityViolation" in capsys.readouterr().err


def test_gap_check(tmp_path):
    assert main(["gap-check", "--config", "s1", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "gap.json").read_text())
    assert rep["margin"] == pytest.approx(3 - math.sqrt(5)) and rep["pass"]
    assert main(["gap-check", "--config", "gap_violating", "--out", str(tmp_path / "g")]) == 3


def test_alpha(tmp_path):
    assert main(["alpha", "--config", "uncoupled", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "alpha.json").read_text())["alpha"] == pytest.approx(0.26, abs=1e-14)
    assert main(["alpha", "--config", "s1", "--out", str(tmp_path)]) == 0
    out = json.loads((tmp_path / "alpha.json").read_text())
    assert out["alpha"] == pytest.approx(19 / (64 * math.sqrt(2)), abs=1e-12)
    assert main(["alpha", "--config", "gap_violating", "--out", str(tmp_path)]) == 3


def test_covariance(tmp_path):
    assert main(["covariance", "--config", "s1", "--out", str(tmp_path)]) == 0
    decay = json.loads((tmp_path / "decay.json").read_text())
    assert decay["r"] == pytest.approx((3 - 2 * math.sqrt(2)) ** 2, rel=0.01)
    cols, rows = _read_csv(tmp_path / "covariance.csv")
    assert cols == ["k", "j", "cqq", "cpp"] and len(rows) == 25 * 25
    diag = [r for r in rows if r[0] == r[1] == "0"][0]
    assert float(diag[2]) == pytest.approx(1 / 32)


def test_covariance_uncoupled_and_two_atom(tmp_path):
    assert main(["covariance", "--config", "uncoupled", "--out", str(tmp_path / "u")]) == 0
    _, rows = _read_csv(tmp_path / "u" / "covariance.csv")
    assert all(float(r[2]) == 0.0 for r in rows if r[0] != "0" or r[1] != "0")
    assert main(["covariance", "--config", "two_atom", "--out", str(tmp_path / "t")]) == 0
    decay = json.loads((tmp_path / "t" / "decay.json").read_text())
    assert decay["r"] <= decay["predicted_r"] * 1.01


def _small_sim(tmp_path, **over):
    text = """
seed = 3
[kernel]
a = [3.0, -1.0]
[measure]
atoms = [[3.0, 0.5]]
[simulation]
N = 32
T = 20.0
replicas = %(replicas)d
sample_times = [5.0, 10.0, 20.0]
epsilon_times = [10.0, 60.0, 256]
[analysis]
window = [-6, 6]
"""
    p = tmp_path / "small.toml"
    p.write_text(text % {"replicas": over.get("replicas", 200)})
    return p


def test_simulate_outputs_are_deterministic(tmp_path):
    cfg = _small_sim(tmp_path)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    for name in ("energy_trace.csv", "variance_profile.csv", "ks.json", "epsilon_stat.json", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    cols, rows = _read_csv(tmp_path / "a" / "variance_profile.csv")
    assert cols == ["k", "var_q", "stderr_q", "var_p", "stderr_p", "prediction_q", "prediction_p"]
    assert len(rows) == 13
    assert "# seeds=3:0..199" in (tmp_path / "a" / "energy_trace.csv").read_text()
    # 17 significant digits
    assert len(rows[0][1].replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 17


def test_simulate_rejects_zero_replicas(tmp_path, capsys):
    cfg = _small_sim(tmp_path, replicas=0)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 2
    assert "replicas" in capsys.readouterr().err


def test_unknown_field_rejected(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[kernel]\na = [3.0, -1.0]\nb = 1\n[measure]\natoms = [[3.0, 0.5]]\n")
    assert main(["alpha", "--config", str(p), "--out", str(tmp_path)]) == 2
    p.write_text("[kernel]\na = 'three'\n[measure]\n")
    assert main(["alpha", "--config", str(p), "--out", str(tmp_path)]) == 2
    p.write_text("[kernel\n")
    assert main(["alpha", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert main(["alpha", "--config", str(tmp_path / "missing.toml")]) == 2


def test_config_hash_ignores_output_dir():
    a = cfgmod.validate({"kernel": {"a": [3, -1]}, "measure": {"atoms": [[3, 0.5]]}, "output": {"dir": "x"}})
    b = cfgmod.validate({"kernel": {"a": [3, -1]}, "measure": {"atoms": [[3, 0.5]]}, "output": {"dir": "y"}})
    c = cfgmod.validate({"kernel": {"a": [3, -1]}, "measure": {"atoms": [[3, 0.5]]}, "seed": 1})
    assert cfgmod.config_hash(a) == cfgmod.config_hash(b) != cfgmod.config_hash(c)


def test_nonzero_ic_config_energy():
    from oscchain.lattice import truncated_V

    cfg = cfgmod.validate(cfgmod.tomllib.loads((__import__("importlib").resources.files("oscchain") / "configs" / "s1_ic.toml").read_text()))
    sc = cfgmod.sim_config_of(cfg)
    state = sc.initial
    assert state.energy(truncated_V(cfgmod.kernel_of(cfg), sc.N)) == pytest.approx(0.5)


def test_verify_subset(tmp_path, capsys):
    assert main(["verify", "--only", "1", "2", "3", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["pass"] and len(rep["criteria"]) == 3
    assert "[PASS] criterion  1" in capsys.readouterr().out


def test_verify_rejects_corrupt_config(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[kernel]\na = []\n[measure]\n")
    assert main(["verify", "--config", str(p), "--out", str(tmp_path)]) == 2
