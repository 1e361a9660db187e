"""Command-line entry points: exit codes, outputs, determinism."""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from walkbandit.chain import ChainInstance
from walkbandit.cli import main


@pytest.fixture()
def outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("WALKBANDIT_OUTDIR", str(tmp_path))
    return tmp_path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def test_validate_builtins(capsys):
    assert main(["validate", "fig1"]) == 0
    assert main(["validate", "exp9"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 2


def test_validate_failing_chain_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    ChainInstance(np.array([[1.0]]), 1.0).save(path)
    assert main(["validate", str(path)]) == 2
    assert "FAIL" in capsys.readouterr().out


def test_validate_unknown_instance(capsys):
    assert main(["validate", "figure-eight"]) == 1
    assert "neither a builtin" in capsys.readouterr().err


def test_unknown_subcommand_exits_nonzero(capsys):
    assert main(["frobnicate"]) == 1


# ---------------------------------------------------------------------------
# seeded runs
# ---------------------------------------------------------------------------


def test_run_ucb_writes_one_csv_per_seed(outdir, capsys):
    assert main(["run-ucb", "--instance", "fig1", "--horizon", "40",
                 "--seeds", "0,2"]) == 0
    for seed in (0, 2):
        rows = read_rows(outdir / f"ucb_fig1_seed{seed}.csv")
        assert rows[0][:4] == ["t", "played", "realized_length", "regret"]
        assert len(rows) == 41
        assert rows[1][0] == "1" and rows[40][0] == "40"
        assert float(rows[40][3]) >= 0.0


def test_run_ucb_from_config_file(outdir, tmp_path, k3):
    chain_file = tmp_path / "dense.json"
    k3.save(chain_file)
    config = tmp_path / "run.json"
    config.write_text(json.dumps({
        "instance": str(chain_file), "horizon": 30, "seeds": 1,
        "params": {"width": "truncation", "rho": 0.7}}))
    assert main(["run-ucb", "--config", str(config)]) == 0
    rows = read_rows(outdir / "ucb_dense_seed0.csv")
    assert len(rows) == 31


def test_run_ucb_bad_configs(outdir, tmp_path, capsys):
    assert main(["run-ucb", "--horizon", "10"]) == 1          # no instance
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2, 3]")
    assert main(["run-ucb", "--config", str(bad)]) == 1       # not an object
    assert main(["run-ucb", "--config", str(tmp_path / "none.json")]) == 1
    assert main(["run-ucb", "--instance", str(tmp_path / "ghost.json")]) == 1


def test_run_on_invalid_chain_exits_two(outdir, tmp_path, capsys):
    path = tmp_path / "cycle.json"
    ChainInstance(np.array([[0.0, 0.5], [0.5, 0.0]]), 0.5).save(path)
    assert main(["run-ucb", "--instance", str(path), "--horizon", "10"]) == 2
    assert "validation failed" in capsys.readouterr().err


# the ring's minimum centrality is tiny, so short-horizon defaults warn
@pytest.mark.filterwarnings("ignore:exploration bias")
def test_run_exp3_variants(outdir, tmp_path):
    assert main(["run-exp3", "--instance", "fig1", "--horizon", "25",
                 "--seeds", "0"]) == 0
    rows = read_rows(outdir / "exp3_fig1_seed0.csv")
    assert len(rows) == 26
    assert any(name.startswith("p_") for name in rows[0])

    config = tmp_path / "std.json"
    config.write_text(json.dumps({
        "instance": "fig1", "horizon": 25, "seeds": [3],
        "params": {"variant": "standard", "learning_rate": 0.01}}))
    assert main(["run-exp3", "--config", str(config)]) == 0
    assert (outdir / "exp3_fig1_seed3.csv").exists()

    config2 = tmp_path / "ratio.json"
    config2.write_text(json.dumps({
        "instance": "exp9", "horizon": 25, "seeds": [0],
        "params": {"variant": "ratio", "cap": 1, "learning_rate": 0.001,
                   "exploration_bias": 0.0}}))
    assert main(["run-exp3", "--config", str(config2)]) == 0


def test_out_flag_overrides_name(outdir):
    assert main(["run-ucb", "--instance", "fig1", "--horizon", "10",
                 "--seeds", "0", "--out", "custom.csv"]) == 0
    assert (outdir / "custom.csv").exists()
    assert main(["run-ucb", "--instance", "fig1", "--horizon", "10",
                 "--seeds", "0,1", "--out", "multi.csv"]) == 0
    assert (outdir / "multi_seed0.csv").exists()
    assert (outdir / "multi_seed1.csv").exists()


# ---------------------------------------------------------------------------
# reports and reproduction
# ---------------------------------------------------------------------------


def test_lowerbound_report(outdir):
    assert main(["lowerbound-report"]) == 0
    rows = read_rows(outdir / "lowerbound_report.csv")
    assert rows[0] == ["eps", "gap_exact", "gap_leading", "step_kl_over_eps2",
                       "traj_kl_over_eps2", "regret_floor"]
    assert len(rows) == 5
    assert float(rows[1][0]) == 1e-4


def test_reproduce_small_runs(outdir):
    assert main(["reproduce", "fig-sto", "--seeds", "0,1",
                 "--horizon", "30"]) == 0
    rows = read_rows(outdir / "fig_sto.csv")
    assert rows[0] == ["t", "regret_mean", "regret_std", "error_mean",
                       "error_std"]
    assert len(rows) == 31

    assert main(["reproduce", "fig-adv", "--seeds", "0",
                 "--horizon", "30"]) == 0
    rows = read_rows(outdir / "fig_adv.csv")
    assert rows[0] == ["t", "traj_exp3_mean", "traj_exp3_std", "exp3_mean",
                       "exp3_std"]
    assert len(rows) == 31


# ---------------------------------------------------------------------------
# plotting
# ---------------------------------------------------------------------------


def test_plot_renders_deterministic_svg(outdir):
    assert main(["reproduce", "fig-sto", "--seeds", "0,1",
                 "--horizon", "20"]) == 0
    csv_path = outdir / "fig_sto.csv"
    assert main(["plot", str(csv_path)]) == 0
    svg = (outdir / "fig_sto.svg").read_bytes()
    assert svg.lstrip().startswith(b"<?xml")
    assert main(["plot", str(csv_path), "--out", "again.svg"]) == 0
    assert (outdir / "again.svg").read_bytes() == svg


def test_plot_requires_the_x_column(outdir, capsys):
    assert main(["reproduce", "fig-sto", "--seeds", "0",
                 "--horizon", "10"]) == 0
    assert main(["plot", str(outdir / "fig_sto.csv"), "--x", "epoch"]) == 1
    assert "no column" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# cross-process determinism
# ---------------------------------------------------------------------------


def test_run_csv_identical_across_processes(tmp_path):
    """Two separate interpreter invocations must produce byte-identical CSVs."""
    blobs = []
    for rep in ("a", "b"):
        env_dir = tmp_path / rep
        env_dir.mkdir()
        proc = subprocess.run(
            [sys.executable, "-m", "walkbandit", "run-ucb", "--instance",
             "exp9", "--horizon", "120", "--seeds", "1"],
            env={"WALKBANDIT_OUTDIR": str(env_dir), "PATH": "/usr/bin:/bin"},
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        blobs.append((env_dir / "ucb_exp9_seed1.csv").read_bytes())
    assert blobs[0] == blobs[1]
