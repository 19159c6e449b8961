"""CLI surface: subcommands, exit codes, and file outputs."""

import json
import os

import pytest

from spinmarket.cli import main


@pytest.fixture()
def cfg_path(tmp_path, tiny_config_doc):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(tiny_config_doc))
    return str(path)


def test_simulate_writes_trace_and_network(tmp_path, capsys):
    out = tmp_path / "sim"
    rc = main(["simulate", "--topology", "ring2", "--seed", "9",
               "--out", str(out), "--config", _small_cfg(tmp_path)])
    assert rc == 0
    captured = capsys.readouterr().out
    assert "model=ring2" in captured
    trace = (out / "trace_ring2.csv").read_text().splitlines()
    assert trace[0] == "t,h,m"
    assert len(trace) == 1 + 256
    net = (out / "network_ring2.txt").read_text().splitlines()
    assert len(net) == 16
    assert net[0] == "0: 1 15"


def _small_cfg(tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps({"params": {"steps": 256}, "replicates": 2,
                                "models": [{"topology": "ring2"},
                                           {"topology": "moore8"}]}))
    return str(path)


def test_experiment_and_stats_roundtrip(tmp_path, cfg_path, capsys):
    out = tmp_path / "exp"
    rc = main(["experiment", "--config", cfg_path, "--out", str(out),
               "--jobs", "2", "--no-plots"])
    assert rc == 0
    assert (out / "report.json").exists()
    assert (out / "intervals.csv").exists()

    re_out = tmp_path / "re"
    rc = main(["stats", "--in", str(out / "intervals.csv"),
               "--config", cfg_path, "--out", str(re_out), "--no-plots"])
    assert rc == 0
    assert (re_out / "report.json").exists()
    # rates are reconstructible exactly from the interval dump
    assert (re_out / "rates.csv").read_bytes() == (out / "rates.csv").read_bytes()


def test_stats_transitions_flag(tmp_path, cfg_path):
    out = tmp_path / "exp"
    assert main(["experiment", "--config", cfg_path, "--out", str(out),
                 "--no-plots"]) == 0
    re_out = tmp_path / "re"
    assert main(["stats", "--in", str(out / "intervals.csv"),
                 "--transitions", "255", "--out", str(re_out),
                 "--no-plots"]) == 0
    doc = json.loads((re_out / "report.json").read_text())
    assert doc["models"][0]["ratio_samples"]


def test_experiment_renders_figures(tmp_path, cfg_path):
    out = tmp_path / "exp"
    rc = main(["experiment", "--config", cfg_path, "--out", str(out)])
    assert rc == 0
    pngs = [p for p in os.listdir(out) if p.endswith(".png")]
    assert "fig_ratio_vs_degree.png" in pngs
    assert any(p.startswith("fig_trace_") for p in pngs)
    assert any(p.startswith("fig_survival_") for p in pngs)


def test_exit_code_2_on_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"models": [{"topology": "hex"}]}))
    assert main(["experiment", "--config", str(bad), "--out",
                 str(tmp_path / "x"), "--no-plots"]) == 2
    assert main(["experiment", "--config", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "x"), "--no-plots"]) == 2
    assert "config error" in capsys.readouterr().err


def test_exit_code_2_on_bad_interval_header(tmp_path, capsys):
    path = tmp_path / "iv.csv"
    path.write_text("wrong,header\n1,2\n")
    assert main(["stats", "--in", str(path), "--out",
                 str(tmp_path / "y"), "--no-plots"]) == 2


def test_exit_code_4_on_unwritable_output(tmp_path, cfg_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("a file, not a directory")
    rc = main(["experiment", "--config", cfg_path,
               "--out", str(blocker / "nested"), "--no-plots"])
    assert rc == 4
    assert "i/o error" in capsys.readouterr().err


def test_cli_determinism_across_jobs(tmp_path, cfg_path):
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["experiment", "--config", cfg_path, "--out", str(out1),
                 "--jobs", "1"]) == 0
    assert main(["experiment", "--config", cfg_path, "--out", str(out2),
                 "--jobs", "3"]) == 0
    files1 = sorted(os.listdir(out1))
    assert files1 == sorted(os.listdir(out2))
    for name in files1:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name
