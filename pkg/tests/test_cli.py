import json

import numpy as np
import pytest

from bosonlab.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_help_lists_all_subcommands(capsys):
    code, out, _ = run_cli(capsys, "--help")
    assert code == 0
    for name in (
        "collision-ratio",
        "birthday-bound",
        "balls-bins",
        "route-permutation",
        "reduction-demo",
        "degree-check",
        "loss-check",
        "gbs-check",
    ):
        assert name in out


def test_unknown_subcommand_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "no-such-command")
    assert code == 1
    assert "no-such-command" in err


def test_route_permutation_prints_layers_and_passes(capsys):
    code, out, _ = run_cli(capsys, "route-permutation", "--modes", "4", "--perm", "3,1,2,4")
    assert code == 0
    assert "layer  1:" in out and "residual 0.000e+00" in out


def test_route_permutation_bad_perm_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "route-permutation", "--modes", "4", "--perm", "1,2")
    assert code == 1


def test_collision_ratio_writes_csv_deterministically(tmp_path, capsys):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    args = [
        "collision-ratio",
        "--modes", "8", "--photons", "1,2", "--reps", "1",
        "--circuits", "3", "--samples", "20", "--seed", "5",
    ]
    code, _, _ = run_cli(capsys, *args, "--out", str(out_a))
    assert code == 0
    code, _, _ = run_cli(capsys, *args, "--out", str(out_b))
    assert code == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    header = out_a.read_text().splitlines()[0]
    assert header == "ensemble,M,N,q,circuit,seed,cf_count,samples,ratio"


def test_config_file_roundtrip(tmp_path, capsys):
    config = tmp_path / "run.json"
    dump = tmp_path / "dump.json"
    out_flag = tmp_path / "flag.csv"
    out_cfg = tmp_path / "cfg.csv"
    args = [
        "collision-ratio", "--modes", "8", "--photons", "2", "--reps", "1",
        "--circuits", "2", "--samples", "10", "--seed", "9",
    ]
    code, _, _ = run_cli(capsys, *args, "--out", str(out_flag), "--dump-config", str(dump))
    assert code == 0
    dumped = json.loads(dump.read_text())
    assert dumped["modes"] == 8 and dumped["seed"] == 9
    config.write_text(json.dumps({k: v for k, v in dumped.items() if k != "paper_scale"}))
    code, _, _ = run_cli(capsys, "collision-ratio", "--config", str(config), "--out", str(out_cfg))
    assert code == 0
    assert out_flag.read_bytes() == out_cfg.read_bytes()


def test_config_flag_overrides_file(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"modes": 4, "perm": "2,1,3,4"}))
    code, out, _ = run_cli(capsys, "route-permutation", "--config", str(config), "--perm", "1,2,3,4")
    assert code == 0
    assert "target image: 1,2,3,4" in out


def test_reduction_demo_json_schema(capsys):
    code, out, _ = run_cli(
        capsys,
        "reduction-demo", "--seed", "4", "--precision", "extended", "--tolerance", "1e-6",
    )
    assert code == 0
    report = json.loads(out)
    assert {"extrapolated", "direct", "abs_error", "amplification", "degree"} <= set(report)
    assert report["abs_error"] < 1e-6


def test_reduction_demo_double_tolerance_failure_exit_2(capsys):
    code, _, err = run_cli(
        capsys,
        "reduction-demo", "--seed", "4", "--precision", "double", "--tolerance", "1e-6",
    )
    assert code == 2
    assert "FAIL" in err


def test_degree_check_small(capsys):
    code, out, _ = run_cli(
        capsys, "degree-check", "--modes", "2", "--photons", "1", "--q", "1", "--seed", "3"
    )
    assert code == 0
    report = json.loads(out)
    assert report["degree"] == 8 and report["degree_is_tight"]


def test_birthday_bound_cli(capsys):
    code, out, _ = run_cli(
        capsys,
        "birthday-bound", "--modes", "32", "--photons", "3",
        "--circuits", "10", "--samples", "20", "--seed", "7",
    )
    assert code == 0
    assert "bound 2N^2/M = 0.56250" in out


def test_balls_bins_cli(capsys):
    code, out, _ = run_cli(
        capsys, "balls-bins", "--modes", "64", "--balls", "8", "--trials", "2000", "--seed", "1"
    )
    assert code == 0
    assert "mean singletons" in out


def test_gbs_check_cli(capsys):
    code, out, _ = run_cli(capsys, "gbs-check", "--seed", "11")
    assert code == 0
    assert "abs diff" in out and "truncated-Fock oracle" in out


def test_loss_check_cli_small(capsys):
    code, out, _ = run_cli(
        capsys,
        "loss-check", "--modes", "4", "--photons", "2", "--rho", "0.15",
        "--samples", "20000", "--seed", "13",
    )
    assert code == 0
    assert "no-loss rate" in out and "conditional-vs-ideal" in out
