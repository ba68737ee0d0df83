import json

import pytest

from mixlab.cli import main, parse_overrides, read_config
from mixlab.experiments import BANDS, REGISTRY, ExperimentSpec, UsageError, list_experiments, run


def test_registry_claims_are_declared():
    assert set(e.claim for e in REGISTRY.values()) == set(BANDS)
    assert "doubling-speedup" in list_experiments()


def test_run_doubling_summary(tmp_path):
    bundle = run(ExperimentSpec("doubling-speedup", {"count": "8"}, seed=1, out=tmp_path))
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["claim"] == "AC-3" and summary["passed"] is True
    header = (tmp_path / "doubling.csv").read_text().splitlines()[0]
    assert header == "p,l,tv_doubling,tv_plain"
    assert bundle.passed


def test_bad_parameter_is_usage_error(tmp_path, capsys):
    with pytest.raises(UsageError, match="schema"):
        run(ExperimentSpec("gap-vs-theta", {"n": "-1"}, out=tmp_path / "x"))
    assert not (tmp_path / "x").exists()
    assert main(["run", "gap-vs-theta", "--n=-1", "--out", str(tmp_path / "y")]) == 2
    assert "usage error" in capsys.readouterr().err
    assert not (tmp_path / "y").exists()
    with pytest.raises(UsageError):
        run(ExperimentSpec("nope"))
    with pytest.raises(UsageError):
        run(ExperimentSpec("riffle", {"bogus": "1"}))


def test_same_seed_same_csv(tmp_path):
    for name, params in [("statistics", {"samples": "5000"}), ("hypercube", {"trials": "4", "wilson_n": "10",
                                                                                "N": "20", "dense_max": "6"})]:
        a, b = tmp_path / f"{name}-a", tmp_path / f"{name}-b"
        run(ExperimentSpec(name, params, seed=42, out=a))
        run(ExperimentSpec(name, params, seed=42, out=b))
        for f in a.glob("*.csv"):
            assert f.read_bytes() == (b / f.name).read_bytes()


def test_overrides_and_config(tmp_path):
    assert parse_overrides(["--n", "5", "--theta-grid=1:2:0.5"]) == {"n": "5", "theta_grid": "1:2:0.5"}
    with pytest.raises(UsageError):
        parse_overrides(["--n"])
    cfg = tmp_path / "c.txt"
    cfg.write_text("# riffle\nn = 20\n")
    assert read_config(cfg) == {"n": "20"}
    assert main(["run", "riffle", "--config", str(cfg), "--dense_max", "3", "--out", str(tmp_path / "o")]) == 1
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["measured"]["first_k_below_half"] == 5


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in REGISTRY)
