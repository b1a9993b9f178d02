"""Command-line front end: config handling, exit codes, outputs."""

import json
import os

import pytest

from calderon_lab import cli
from calderon_lab.cli import CATALOG, RunConfig, list_experiments, load_config, main


def test_catalog_order_is_stable():
    ids = [c[0] for c in CATALOG]
    assert ids[0] == "t1-identities"
    assert "cauchy-series" in ids
    assert len(ids) == len(set(ids)) == 8


def test_list_experiments(capsys):
    assert main(["list-experiments"]) == 0
    out = capsys.readouterr().out
    for exp_id, _, _ in CATALOG:
        assert exp_id in out


def test_no_command_prints_help():
    assert main([]) == 1


def test_unknown_experiment_flag_is_usage_error():
    assert main(["run", "--experiment", "frobnicate"]) == 1


def test_dump_config_roundtrip(tmp_path, capsys):
    assert main(["run", "--dump-config", "--n", "512", "--seed", "9"]) == 0
    text = capsys.readouterr().out
    path = tmp_path / "dumped.ini"
    path.write_text(text)
    cfg = load_config(path)
    assert cfg.n == 512
    assert cfg.seed == 9
    assert cfg.experiment == "t1-identities"


def test_unknown_key_is_named(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[run]\nfoo = 1\n")
    with pytest.raises(ValueError, match="unknown config key 'foo'"):
        load_config(path)


def test_unknown_section_rejected(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[mystery]\nn = 4\n")
    with pytest.raises(ValueError, match=r"unknown config section \[mystery\]"):
        load_config(path)


def test_bad_value_rejected(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[run]\nn = twelve\n")
    with pytest.raises(ValueError, match="bad value for 'n'"):
        load_config(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ValueError, match="not found"):
        load_config(tmp_path / "nope.ini")
    assert main(["run", "--config", str(tmp_path / "nope.ini")]) == 1


def test_run_cauchy_small(tmp_path):
    out = tmp_path / "results"
    code = main(
        ["run", "--experiment", "cauchy-series", "--n", "512", "--depth", "3", "--out", str(out)]
    )
    assert code == 0
    assert (out / "cauchy-series.csv").exists()
    payload = json.loads((out / "cauchy-series.json").read_text())
    assert payload["fit"]["passed"] is True
    assert payload["schema_version"] == 1


def test_run_config_file_applied(tmp_path):
    path = tmp_path / "run.ini"
    out = tmp_path / "results"
    path.write_text(f"[run]\nexperiment = cauchy-series\nn = 512\ndepth = 2\noutdir = {out}\n")
    assert main(["run", "--config", str(path)]) == 0
    assert (out / "cauchy-series.json").exists()


def test_run_square_shift_writes_plot(tmp_path):
    out = tmp_path / "results"
    cfg = RunConfig(
        experiment="shift-log-square", n=1024, trials=2, outdir=str(out), plot=True
    )
    assert cli.run(cfg) == 0
    assert (out / "shift-log-square.svg").exists()
    assert (out / "shift-log-square.csv").exists()


def test_run_t1_coarse(tmp_path):
    out = tmp_path / "results"
    assert main(["run", "--experiment", "t1-identities", "--n", "1024", "--out", str(out)]) == 0
    payload = json.loads((out / "t1-identities.json").read_text())
    assert payload["fit"]["passed"] is True
    assert set(payload["fit"]["identities"]) == {"calc1", "calc2", "t1_c1", "t1_c2", "t1_T1A"}
