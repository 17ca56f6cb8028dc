import csv
import json

import numpy as np
import pytest

from wirechan.channel import ImpulseResponse
from wirechan.cli import main


def run(*argv):
    return main([str(a) for a in argv])


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_generate_writes_ensemble_and_manifest(tmp_path):
    out = tmp_path / "a"
    assert run("generate", "--profile", "ih-plc-urban", "--pdp", "two-tap", "--count", 50,
               "--seed", 7, "--out", out) == 0
    assert len(rows(out / "ensemble.csv")) == 50
    man = json.loads((out / "manifest.json").read_text())
    assert man["seed"] == 7 and man["version"]
    assert man["resolved"]["pdp"] == "two-tap"
    assert "[ih-plc-urban]" in man["resolved"]["profile_config"]
    assert "time" not in json.dumps(man).lower()


def test_seed_defaults_to_zero(tmp_path):
    run("generate", "--count", 3, "--out", tmp_path)
    assert json.loads((tmp_path / "manifest.json").read_text())["seed"] == 0


def test_byte_identical_reruns(tmp_path):
    args = ("coverage", "--count", 100, "--seed", 3, "--pdp", "two-tap")
    run(*args, "--out", tmp_path / "x")
    run(*args, "--out", tmp_path / "y")
    for name in ("coverage.csv", "ensemble.csv", "coverage_summary.json", "manifest.json"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()


def test_coverage_correlation(tmp_path):
    run("coverage", "--profile", "ih-plc-urban", "--count", 2000, "--seed", 7,
        "--pdp", "two-tap", "--out", tmp_path)
    summary = json.loads((tmp_path / "coverage_summary.json").read_text())
    assert summary["corr_gain"] > 0.95 and summary["corr_rmsds"] < 0
    cdf = rows(tmp_path / "coverage.csv")
    assert float(cdf[-1]["cdf"]) == 1.0


def test_replay_reproduces_without_inputs(tmp_path):
    chan = tmp_path / "chan.json"
    chan.write_text(ImpulseResponse(np.array([1e-2, -4e-3, 1e-3]), 1 / 60e6).to_json())
    run("capacity", "--channel", chan, "--out", tmp_path / "a")
    chan.unlink()
    assert run("replay", tmp_path / "a" / "manifest.json", "--out", tmp_path / "b") == 0
    for name in ("capacity.json", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_unknown_profile_exit_1(tmp_path, capsys):
    assert run("generate", "--profile", "nope", "--out", tmp_path) == 1
    err = capsys.readouterr().err
    assert "ih-plc-urban" in err and "mv-plc" in err


def test_usage_errors_exit_1(tmp_path):
    assert run("generate", "--count", "many") == 1
    assert run("frobnicate") == 1
    assert run("metrics", "--channel", tmp_path / "missing.json") == 1


def test_unwritable_output_exit_2(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run("generate", "--count", 2, "--out", blocker / "sub") == 2


def test_env_default_output(tmp_path, monkeypatch):
    monkeypatch.setenv("WIRECHAN_OUT", str(tmp_path / "env"))
    assert run("generate", "--count", 2) == 0
    assert (tmp_path / "env" / "ensemble.csv").exists()


def test_config_file_profile_and_generator_section(tmp_path):
    cfg = tmp_path / "p.ini"
    cfg.write_text("[generator]\npdp = exponential\ncount = 4\n\n"
                   "[hot]\nbase = ih-plc-urban\natten_mu_db = 50\n")
    assert run("generate", "--config", cfg, "--profile", "hot", "--out", tmp_path / "o") == 0
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["resolved"]["pdp"] == "exponential" and man["resolved"]["count"] == 4
    assert man["profile"]["atten_mu_db"] == 50.0


def test_config_unknown_key_exit_1(tmp_path, capsys):
    cfg = tmp_path / "p.ini"
    cfg.write_text("[x]\nbase = mv-plc\nalpha_typo = 3\n")
    assert run("generate", "--config", cfg, "--profile", "x", "--out", tmp_path) == 1
    err = capsys.readouterr().err
    assert "alpha_typo" in err and "line 3" in err


def test_metrics(tmp_path):
    chan = tmp_path / "c.csv"
    chan.write_text(ImpulseResponse(np.array([1.0, 1.0]), 1e-6).to_csv())
    run("metrics", "--channel", chan, "--out", tmp_path)
    m = json.loads((tmp_path / "metrics.json").read_text())
    assert m["gain_db"] == pytest.approx(10 * np.log10(2))
    assert m["rmsds_s"] == pytest.approx(0.5e-6)


def test_sweep_resamples_and_flags_optimum(tmp_path):
    chan = tmp_path / "c.csv"
    k = np.arange(40)
    chan.write_text(ImpulseResponse(1e-2 * np.exp(-k / 8.0) * (-1.0) ** k, 4e-8).to_csv())
    assert run("sweep", "--channel", chan, "--grid", "default", "--out", tmp_path) == 0
    table = rows(tmp_path / "sweep.csv")
    assert list(table[0]) == ["M", "nu", "rate_bps", "is_optimal"]
    assert sum(r["is_optimal"] == "1" for r in table) == 1


def test_sweep_custom_grid(tmp_path):
    chan = tmp_path / "c.json"
    chan.write_text(ImpulseResponse(np.array([1e-2, 1e-3]), 1 / 60e6).to_json())
    run("sweep", "--channel", chan, "--grid", "M=256;nu=0,1", "--out", tmp_path)
    assert [(r["M"], r["nu"]) for r in rows(tmp_path / "sweep.csv")] == [("256", "0"), ("256", "1")]
    assert run("sweep", "--channel", chan, "--grid", "K=1", "--out", tmp_path) == 1


def test_regress_and_tests_commands(tmp_path):
    run("generate", "--count", 300, "--pdp", "two-tap", "--seed", 1, "--out", tmp_path / "g")
    ens = tmp_path / "g" / "ensemble.csv"
    assert run("regress", "--input", ens, "--out", tmp_path / "r") == 0
    fit = json.loads((tmp_path / "r" / "regression.json").read_text())
    assert fit["slope"] == pytest.approx(-0.0028, rel=1e-6)
    assert rows(tmp_path / "r" / "regression.csv")[0]["form"] == "linear"

    assert run("tests", "--input", ens, "--column", "gain_db", "--db",
               "--ks-column", "gain_db", "--out", tmp_path / "t") == 0
    rep = json.loads((tmp_path / "t" / "tests.json").read_text())
    names = [t["test_name"] for t in rep["tests"]]
    assert names[0] == "jarque-bera" and names[-1] == "kolmogorov-smirnov"
    assert rep["battery_rejects"] is False
    assert len(rows(tmp_path / "t" / "tests.csv")) == len(names)


def test_tests_missing_column(tmp_path):
    run("generate", "--count", 10, "--out", tmp_path)
    assert run("tests", "--input", tmp_path / "ensemble.csv", "--column", "nope",
               "--out", tmp_path) == 1


def test_lptv_command(tmp_path):
    assert run("lptv", "--harmonics", 2, "--count", 1, "--out", tmp_path) == 0
    obj = json.loads((tmp_path / "lptv.json").read_text())
    assert sorted(int(m) for m in obj["harmonics"]) == [-2, -1, 0, 1, 2]


def test_no_temp_files_left(tmp_path):
    run("generate", "--count", 5, "--save-channels", "--out", tmp_path)
    leftovers = [p for p in tmp_path.rglob("*") if p.name.endswith(".tmp")]
    assert leftovers == []
    assert len(list((tmp_path / "channels").glob("*.json"))) == 5
