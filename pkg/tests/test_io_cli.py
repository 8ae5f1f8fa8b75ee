import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chiralwell import config as cfgmod
from chiralwell import io
from chiralwell.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main

finite = st.floats(allow_nan=False, allow_infinity=True, width=64)


@given(st.lists(finite, min_size=1, max_size=30))
def test_table_round_trip_exact(xs):
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "t.csv"
        io.write_table(path, {"x": xs, "i": list(range(len(xs)))}, {"a": {"b": 1.5}})
        meta, cols = io.read_table(path)
    assert meta["a"] == {"b": 1.5}
    assert [float(v) for v in cols["x"]] == xs
    assert cols["i"] == list(range(len(xs)))


def test_table_rejects_ragged_and_separators(tmp_path):
    with pytest.raises(ValueError):
        io.write_table(tmp_path / "a.csv", {"x": [1.0], "y": [1.0, 2.0]})
    with pytest.raises(ValueError):
        io.write_table(tmp_path / "b.csv", {"x": ["a,b"]})


def test_records_round_trip(tmp_path):
    p = io.write(tmp_path / "r", {"x": np.array([0.1, math.nan]), "k": np.array([1, 2])}, {"seed": 3}, "records")
    assert p.suffix == ".jsonl"
    meta, recs = io.read_records(p)
    assert meta["seed"] == 3
    assert recs[0] == {"x": 0.1, "k": 1} and recs[1]["x"] == "nan"


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        io.write(tmp_path / "r", {"x": [1]}, {}, "parquet")


def test_config_defaults_and_overrides(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"model": {"mu": 4.5}}))
    cfg = cfgmod.load(f, [("model.zeta", "0.3")])
    assert cfg["model"]["mu"] == 4.5 and cfg["model"]["zeta"] == 0.3
    assert cfg["integration"]["rtol"] == 1e-10


@pytest.mark.parametrize("pairs", [
    [("model.mu", "-1")],
    [("model.zeta", "-0.1")],
    [("initial.z", "1.5")],
    [("model.nonsense", "1")],
    [("integration.pole_policy", "ignore")],
    [("collisions.rate", "-2")],
    [("model.lambda_plus", "1.0")],
])
def test_config_rejections(pairs):
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.load(None, pairs)


def test_pressure_mapping():
    cfg = cfgmod.load(None, [("model.pressure", "2.0"), ("model.pressure_coefficient", "1.5")])
    assert cfgmod.model_params(cfg).mu == pytest.approx(3.0)


@pytest.mark.parametrize("argv", [
    ["--mu", "-1"], ["--zeta", "-0.5"], ["--z0", "1.2"], ["--set", "model.bogus=1"], ["--set", "novalue"],
])
def test_cli_config_errors_exit_2(tmp_path, argv, capsys):
    assert main(["simulate", "--out", str(tmp_path)] + argv) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_cli_numeric_failure_exit_3(tmp_path, capsys):
    argv = ["simulate", "--out", str(tmp_path), "--z0", "1.0", "--set", "integration.pole_policy=error"]
    assert main(argv) == EXIT_NUMERIC
    assert "numerical failure" in capsys.readouterr().err


def test_cli_ensemble_attractor_needs_supercritical(tmp_path):
    assert main(["ensemble", "--out", str(tmp_path), "--mu", "0.5", "--n", "2"]) == EXIT_CONFIG


def test_simulate_outputs(tmp_path, capsys):
    assert main(["simulate", "--out", str(tmp_path), "--mu", "1.5", "--t-end", "2"]) == EXIT_OK
    meta, cols = io.read_table(tmp_path / "trajectory.csv")
    assert meta["command"] == "simulate" and meta["config"]["model"]["mu"] == 1.5
    assert cols["t_tau"][-1] == pytest.approx(2.0)
    assert set(cols) == {"t", "t_tau", "z", "theta", "energy", "charge", "region"}
    assert "nearest stationary point" in capsys.readouterr().out


def test_simulate_records_with_collisions(tmp_path):
    argv = ["simulate", "--out", str(tmp_path), "--rate", "2.0", "--t-end", "3", "--format", "records", "--seed", "4"]
    assert main(argv) == EXIT_OK
    _, events = io.read_records(tmp_path / "events.jsonl")
    assert len(events) > 0 and all(-math.pi < e["delta_theta"] <= math.pi for e in events)


def test_portrait_subcritical_note(tmp_path, capsys):
    argv = ["portrait", "--out", str(tmp_path), "--mu", "0.8", "--set", "portrait.nz=5", "--set", "portrait.ntheta=8"]
    assert main(argv) == EXIT_OK
    assert "no separatrix" in capsys.readouterr().out
    assert not (tmp_path / "separatrix.csv").exists()


def test_portrait_supercritical(tmp_path):
    argv = ["portrait", "--out", str(tmp_path), "--mu", "3", "--set", "portrait.nz=5", "--set", "portrait.ntheta=8"]
    assert main(argv) == EXIT_OK
    _, sep = io.read_table(tmp_path / "separatrix.csv")
    assert max(abs(z) for z in sep["z"]) == pytest.approx(2 * math.sqrt(2) / 3, abs=1e-9)


def test_bifurcate_onset(tmp_path):
    assert main(["bifurcate", "--out", str(tmp_path), "--zeta", "0.2"]) == EXIT_OK
    meta, cols = io.read_table(tmp_path / "branches.csv")
    assert meta["onset_mu"] == pytest.approx(1.0, abs=1e-9)
    assert len(cols["mu"]) == 91


def test_stationary_and_basin(tmp_path):
    assert main(["stationary", "--out", str(tmp_path), "--mu", "4.5"]) == EXIT_OK
    _, cols = io.read_table(tmp_path / "stationary.csv")
    assert len(cols["z"]) == 4
    argv = ["basin", "--out", str(tmp_path), "--mu", "4.5", "--set", "basin.nz=3", "--set", "basin.ntheta=4"]
    assert main(argv) == EXIT_OK
    _, b = io.read_table(tmp_path / "basin.csv")
    assert len(b["label"]) == 12


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


@pytest.mark.parametrize("argv", [
    ["simulate", "--rate", "1.0", "--t-end", "5", "--seed", "9"],
    ["ensemble", "--n", "8", "--set", "ensemble.t_end_tau=20", "--rate", "0.3", "--seed", "9"],
])
def test_repeat_runs_byte_identical(tmp_path, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--out", str(a)]) == EXIT_OK
    assert main(argv + ["--out", str(b)]) == EXIT_OK
    assert _files(a) == _files(b)


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "chiralwell", "stationary", "--out", str(tmp_path), "--mu", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and (tmp_path / "stationary.csv").exists()
