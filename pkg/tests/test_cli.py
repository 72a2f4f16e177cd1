"""End-to-end command-line runs against small, fast configurations."""

import csv

import numpy as np
import pytest

from halfwave.cli import main
from halfwave.fieldio import parse_config, read_field


def _read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


def test_ground_state_command(tmp_path):
    rc = main(
        [
            "ground-state",
            "--out",
            str(tmp_path),
            "--set",
            "p=2",
            "--set",
            "n=2048",
            "--set",
            "L=200",
        ]
    )
    assert rc == 0
    field, header = read_field(tmp_path / "ground_state.txt")
    assert field.grid.n == 2048
    assert field.grid.length == 200.0
    assert np.all(field.values.imag == 0.0)
    assert header["p"] == 2
    assert header["omega"] == 1
    assert header["residual"] < 1e-10
    assert abs(header["mass"] - 2.0 * np.pi) < 1e-3
    assert 1.7 < header["decay_exponent"] < 2.3
    summary = parse_config(tmp_path / "summary.txt")
    assert summary["residual"] == header["residual"]
    assert summary["iterations"] >= 1


def test_spectrum_command(tmp_path):
    rc = main(
        [
            "spectrum",
            "--out",
            str(tmp_path),
            "--set",
            "p=2",
            "--set",
            "n=512",
            "--set",
            "L=60",
        ]
    )
    assert rc == 0
    summary = parse_config(tmp_path / "summary.txt")
    # The free minima follow from the profile equation itself: the
    # profile is an eigenvector of the plus form at -(p - 1), and the
    # minus form vanishes on it.
    assert abs(summary["lambda_minus_unconstrained"]) <= 1e-10
    assert abs(summary["lambda_plus_unconstrained"] + 1.0) < 1e-6
    assert abs(summary["lambda_minus_Q"] - 0.5) < 1e-4
    assert summary["lambda_plus_QQprime"] > 0.05


def test_identities_command_and_determinism(tmp_path):
    args = [
        "identities",
        "--set",
        "n=2048",
        "--set",
        "L=60",
        "--set",
        "count=20",
        "--set",
        "seed=11",
    ]
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0

    summary = parse_config(out1 / "summary.txt")
    assert summary["c_half_error"] < 1e-10
    assert summary["gaussian_oracle_error"] < 1e-3
    assert summary["gaussian_oracle_error"] == pytest.approx(
        8.97331141421294e-4, rel=1e-6
    )
    assert summary["corpus_rerun_identical"] == 1
    assert np.isfinite(summary["corpus_max_ratio"])

    table = _read_csv(out1 / "commutator_corpus.csv")
    assert table[0] == ["index", "ratio"]
    assert len(table) == 21
    assert all(np.isfinite(float(row[1])) for row in table[1:])

    assert (out1 / "summary.txt").read_bytes() == (out2 / "summary.txt").read_bytes()
    assert (out1 / "commutator_corpus.csv").read_bytes() == (
        out2 / "commutator_corpus.csv"
    ).read_bytes()


def test_evolve_command(tmp_path):
    rc = main(
        [
            "evolve",
            "--out",
            str(tmp_path),
            "--set",
            "p=2",
            "--set",
            "omega1=1",
            "--set",
            "n=1024",
            "--set",
            "L=200",
            "--set",
            "dt=0.01",
            "--set",
            "T=1",
            "--set",
            "stride=0.5",
            "--set",
            "save_fields=1",
        ]
    )
    assert rc == 0
    table = _read_csv(tmp_path / "conserved.csv")
    assert table[0] == ["t", "E", "M", "P"]
    assert [float(row[0]) for row in table[1:]] == [0.0, 0.5, 1.0]
    for name in ("field_0.txt", "field_1.txt", "field_2.txt"):
        assert (tmp_path / name).exists()
    _, header = read_field(tmp_path / "field_2.txt")
    assert header["t"] == 1
    summary = parse_config(tmp_path / "summary.txt")
    assert 0.0 < summary["standing_wave_error"] < 5e-3
    assert abs(summary["mass_drift"]) < 1e-12
    assert abs(summary["energy_drift"]) < 1e-6
    assert abs(summary["momentum_drift"]) < 1e-12


def test_decompose_command_recovers_exact_superposition(tmp_path):
    rc = main(["decompose", "--out", str(tmp_path), "--set", "p=2", "--set", "alpha=0"])
    assert rc == 0
    summary = parse_config(tmp_path / "summary.txt")
    assert abs(summary["omega1"] - 0.9) < 1e-8
    assert abs(summary["omega2"] - 1.1) < 1e-8
    assert abs(summary["x1"] + 20.0) < 1e-6
    assert abs(summary["x2"] - 20.0) < 1e-6
    assert abs(summary["gamma1"]) < 1e-6
    assert abs(summary["gamma2"]) < 1e-6
    assert summary["eps_hhalf"] < 1e-8
    assert summary["ortho_resid"] < 1e-10
    assert summary["iterations"] >= 1


def _collision_args(out):
    return [
        "stability-two",
        "--out",
        str(out),
        "--set",
        "p=2",
        "--set",
        "n=1024",
        "--set",
        "box_length=200",
        "--set",
        "t_final=3.0",
        "--set",
        "dt=0.005",
        "--set",
        "stride=0.25",
        "--set",
        "alpha=0.01",
        "--set",
        "sigma=5",
        "--set",
        "seed=7",
    ]


def test_stability_two_collision_returns_status_two(tmp_path):
    rc = main(_collision_args(tmp_path))
    assert rc == 2
    summary = parse_config(tmp_path / "summary.txt")
    assert 0.0 < float(summary["t_star"]) <= 3.0
    assert summary["sup_eps_hhalf"] > 0.0
    series = _read_csv(tmp_path / "series.csv")
    assert series[0][:4] == ["t", "omega1", "x1", "gamma1"]
    assert float(series[-1][0]) <= 3.0
    assert (tmp_path / "conserved.csv").exists()
    assert (tmp_path / "monotonicity.csv").exists()
    assert (tmp_path / "comparison.csv").exists()


def test_sweep_command_matches_pinned_rows(tmp_path, capsys):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(
        "p = 2\nn = 1024\nbox_length = 200\nt_final = 3.0\ndt = 0.005\n"
        "stride = 0.25\nalpha = 0.01\nsigma = 5,40\nseed = 7\nmode = stability-two\n"
    )
    out = tmp_path / "out"
    rc = main(["sweep", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "runs = 2" in stdout

    table = _read_csv(out / "sweep.csv")
    lines = [",".join(row) for row in table]
    assert lines[0] == "alpha,sigma,p,sup_eps,min_A0,max_omega_drift,t_star"
    assert lines[1] == (
        "0.01,5,2,0.43065676849824619,2.050746516658315,"
        "0.051661150747300821,2"
    )
    assert lines[2] == (
        "0.01,40,2,0.016772322530568352,0.47920921515909576,"
        "0.0029813957405824265,none"
    )

    summary = parse_config(out / "summary.txt")
    assert summary["mode"] == "stability-two"
    assert summary["runs"] == 2
    assert summary["flag_alpha_monotonicity"] == 0
    assert summary["flag_sigma_monotonicity"] == 0
    for name in ("run_alpha0.01_sigma5", "run_alpha0.01_sigma40"):
        assert (out / name / "summary.txt").exists()
        assert (out / name / "series.csv").exists()


def test_sweep_with_no_values_writes_header_only(tmp_path):
    rc = main(
        ["sweep", "--out", str(tmp_path), "--set", "p=2", "--set", "alpha="]
    )
    assert rc == 0
    table = _read_csv(tmp_path / "sweep.csv")
    assert table == [["alpha", "sigma", "p", "sup_eps", "min_A0", "max_omega_drift", "t_star"]]
    summary = parse_config(tmp_path / "summary.txt")
    assert summary["runs"] == 0


def test_sweep_rejects_unknown_mode(tmp_path, capsys):
    rc = main(["sweep", "--out", str(tmp_path), "--set", "p=2", "--set", "mode=bogus"])
    assert rc == 1
    assert "sweep mode" in capsys.readouterr().err


def test_missing_required_key(tmp_path, capsys):
    rc = main(["evolve", "--out", str(tmp_path)])
    assert rc == 1
    assert "missing required key 'p'" in capsys.readouterr().err


def test_invalid_value_reports_key(tmp_path, capsys):
    rc = main(["ground-state", "--out", str(tmp_path), "--set", "p=abc"])
    assert rc == 1
    assert "invalid value" in capsys.readouterr().err


def test_malformed_set_argument(tmp_path, capsys):
    rc = main(["evolve", "--out", str(tmp_path), "--set", "p"])
    assert rc == 1
    assert "--set expects KEY=VALUE" in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    rc = main(
        [
            "stability-single",
            "--out",
            str(tmp_path),
            "--set",
            "p=2",
            "--set",
            "bogus=1",
        ]
    )
    assert rc == 1
    assert "unknown config key" in capsys.readouterr().err


def test_unknown_subcommand_exits():
    with pytest.raises(SystemExit) as err:
        main(["bogus"])
    assert err.value.code == 2


def test_config_file_with_override(tmp_path):
    cfg = tmp_path / "spec.cfg"
    cfg.write_text("p = 2\nn = 512\nL = 60\n")
    out = tmp_path / "out"
    rc = main(
        ["spectrum", "--config", str(cfg), "--out", str(out), "--set", "n=256"]
    )
    assert rc == 0
    summary = parse_config(out / "summary.txt")
    assert summary["n"] == 256
    assert summary["L"] == 60
