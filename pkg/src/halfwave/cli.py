"""Command-line front end.

Every subcommand reads a flat key = value config (--config), applies
--set KEY=VALUE overrides, writes its artifacts into --out, and echoes a
summary block to stdout.  Exit status: 0 = completed, 2 = a stability
run recorded an exit time t* (the run itself is still data), 1 = hard
error with a one-line diagnostic on stderr.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fieldio
from .evolution import EvolutionError, conservation_report, evolve
from .experiments import (
    RunSettings,
    get_family,
    initial_data,
    run_single_wave_stability,
    run_two_wave_stability,
)
from .grid import Field, make_grid
from .ground_state import ConvergenceError, solve_ground_state
from .linearized import constrained_min_eigenvalue
from .modulation import DecompositionError, WaveParams, decompose, initial_guess
from .spectral import (
    commutator_corpus,
    fractional_derivative,
    fractional_derivative_integral,
    normalization_constant,
    sobolev_norm,
    spatial_derivative,
)

__all__ = ["main"]

_REQUIRED = {
    "ground-state": ("p",),
    "spectrum": ("p",),
    "identities": (),
    "evolve": ("p",),
    "decompose": ("p",),
    "stability-single": ("p",),
    "stability-two": ("p",),
    "sweep": ("p",),
}


class CliError(Exception):
    pass


def _emit_summary(out: Path, mapping: dict) -> None:
    fieldio.write_summary(out / "summary.txt", mapping)
    for key, value in mapping.items():
        print(f"{key} = {fieldio.format_value(value)}")


def _pick(mapping: dict, key: str, default, cast):
    raw = mapping.get(key, default)
    try:
        return cast(raw)
    except (TypeError, ValueError):
        raise CliError(f"key {key!r} has invalid value {raw!r}")


def _cmd_ground_state(mapping: dict, out: Path) -> int:
    p = _pick(mapping, "p", None, float)
    omega = _pick(mapping, "omega", 1.0, float)
    n = _pick(mapping, "n", 8192, int)
    length = _pick(mapping, "L", 400.0, float)
    tol = _pick(mapping, "tol", 1e-10, float)
    gs = solve_ground_state(omega, p, make_grid(n, length), tol=tol)
    header = {
        "p": p,
        "omega": omega,
        "residual": gs.residual_norm,
        "iterations": gs.iterations,
        "mass": gs.mass,
        "decay_exponent": gs.decay_exponent,
    }
    fieldio.write_field(out / "ground_state.txt", gs.profile, header)
    _emit_summary(out, {"n": n, "L": length, **header})
    return 0


def _cmd_spectrum(mapping: dict, out: Path) -> int:
    p = _pick(mapping, "p", None, float)
    omega = _pick(mapping, "omega", 1.0, float)
    n = _pick(mapping, "n", 2048, int)
    length = _pick(mapping, "L", 120.0, float)
    q = solve_ground_state(omega, p, make_grid(n, length))
    qprime = spatial_derivative(q.profile)
    summary = {
        "p": p,
        "omega": omega,
        "n": n,
        "L": length,
        "lambda_minus_unconstrained": constrained_min_eigenvalue("minus", q, []),
        "lambda_minus_Q": constrained_min_eigenvalue("minus", q, [q.profile]),
        "lambda_plus_unconstrained": constrained_min_eigenvalue("plus", q, []),
        "lambda_plus_QQprime": constrained_min_eigenvalue("plus", q, [q.profile, qprime]),
    }
    _emit_summary(out, summary)
    return 0


def _cmd_identities(mapping: dict, out: Path) -> int:
    n = _pick(mapping, "n", 4096, int)
    length = _pick(mapping, "L", 120.0, float)
    seed = _pick(mapping, "seed", 7, int)
    count = _pick(mapping, "count", 100, int)
    grid = make_grid(n, length)
    gaussian = Field(grid, np.exp(-grid.x**2))
    spectral_side = fractional_derivative(gaussian, 1.0)
    integral_side = fractional_derivative_integral(gaussian, 0.5)
    oracle_error = float(np.max(np.abs(spectral_side.values - integral_side.values)))
    ratios = commutator_corpus(grid, seed=seed, count=count)
    rerun = commutator_corpus(grid, seed=seed, count=count)
    fieldio.write_csv(
        out / "commutator_corpus.csv",
        ["index", "ratio"],
        [(i, r) for i, r in enumerate(ratios)],
    )
    _emit_summary(
        out,
        {
            "n": n,
            "L": length,
            "seed": seed,
            "count": count,
            "c_half": normalization_constant(0.5),
            "c_half_error": abs(normalization_constant(0.5) - 1.0 / np.pi),
            "gaussian_oracle_error": oracle_error,
            "corpus_max_ratio": float(np.max(ratios)),
            "corpus_rerun_identical": bool(np.array_equal(ratios, rerun)),
        },
    )
    return 0


def _cmd_evolve(mapping: dict, out: Path) -> int:
    p = _pick(mapping, "p", None, float)
    omega = _pick(mapping, "omega1", 1.0, float)
    n = _pick(mapping, "n", 4096, int)
    length = _pick(mapping, "L", 400.0, float)
    dt = _pick(mapping, "dt", 1e-3, float)
    t_final = _pick(mapping, "T", 10.0, float)
    stride = _pick(mapping, "stride", 0.5, float)
    save_fields = _pick(mapping, "save_fields", 0, int)
    grid = make_grid(n, length)
    gs = solve_ground_state(omega, p, grid)
    u0 = Field(grid, gs.profile.values.astype(complex))
    traj = evolve(u0, t_final, dt, p, stride=stride)
    fieldio.write_csv(
        out / "conserved.csv",
        ["t", "E", "M", "P"],
        [
            (t, c.energy, c.mass, c.momentum)
            for t, c in zip(traj.times, traj.conserved)
        ],
    )
    if save_fields:
        width = len(str(len(traj.times) - 1))
        for i, snap in enumerate(traj.snapshots):
            fieldio.write_field(
                out / f"field_{i:0{width}d}.txt", snap, {"t": traj.times[i]}
            )
    drift = conservation_report(traj)
    exact = Field(grid, gs.profile.values * np.exp(1j * omega * t_final))
    deviation = Field(grid, traj.snapshots[-1].values - exact.values)
    _emit_summary(
        out,
        {
            "p": p,
            "omega1": omega,
            "n": n,
            "L": length,
            "dt": dt,
            "T": t_final,
            "stride": stride,
            "standing_wave_error": sobolev_norm(deviation, 0.5),
            "energy_drift": drift.energy_drift,
            "mass_drift": drift.mass_drift,
            "momentum_drift": drift.momentum_drift,
        },
    )
    return 0


def _cmd_decompose(mapping: dict, out: Path) -> int:
    settings = RunSettings.from_mapping(mapping)
    family = get_family(settings.p)
    grid = settings.grid()
    params = WaveParams(
        [settings.omega1, settings.omega2],
        [-settings.sigma / 2.0, settings.sigma / 2.0],
        [0.0, 0.0],
    )
    u0 = initial_data(
        family, params, grid, settings.alpha, settings.perturbation_kind, settings.seed
    )
    dec = decompose(u0, initial_guess(u0, 2, family), family)
    summary = dict(settings.to_mapping())
    for k in range(2):
        summary[f"omega{k + 1}"] = dec.params.omega[k]
        summary[f"x{k + 1}"] = dec.params.position[k]
        summary[f"gamma{k + 1}"] = dec.params.phase[k]
    summary.update(
        eps_l2=dec.eps_l2,
        eps_hhalf=dec.eps_hhalf,
        ortho_resid=dec.orthogonality_residual,
        iterations=dec.iterations,
    )
    _emit_summary(out, summary)
    return 0


def _series_csv(path, series) -> None:
    names = ["t"]
    for k in range(series.count):
        names += [f"omega{k + 1}", f"x{k + 1}", f"gamma{k + 1}"]
    names += ["eps_l2", "eps_hhalf", "ortho_resid"]
    rows = []
    for i in range(len(series.times)):
        row = [series.times[i]]
        for k in range(series.count):
            row += [series.omega[i, k], series.position[i, k], series.phase[i, k]]
        row += [series.eps_l2[i], series.eps_hhalf[i], series.ortho_resid[i]]
        rows.append(row)
    fieldio.write_csv(path, names, rows)


def _write_stability_artifacts(report, out: Path) -> None:
    _series_csv(out / "series.csv", report.series)
    fieldio.write_csv(
        out / "conserved.csv",
        ["t", "E", "M", "P"],
        [
            (t, c.energy, c.mass, c.momentum)
            for t, c in zip(report.trajectory.times, report.trajectory.conserved)
        ],
    )
    if report.monotonicity is not None:
        base = report.monotonicity["base"]
        plus = report.monotonicity["plus"]
        minus = report.monotonicity["minus"]
        fieldio.write_csv(
            out / "monotonicity.csv",
            ["t", "J2", "dJ2", "J2_plus", "dJ2_plus", "J2_minus", "dJ2_minus"],
            [
                (
                    base.times[i],
                    base.values[i],
                    base.change[i],
                    plus.values[i],
                    plus.change[i],
                    minus.values[i],
                    minus.change[i],
                )
                for i in range(len(base.times))
            ],
        )
    if report.comparisons is not None:
        fieldio.write_csv(
            out / "comparison.csv",
            [
                "t",
                "defect1_plus",
                "defect1_minus",
                "defect2_plus",
                "defect2_minus",
                "budget",
                "flagged",
            ],
            [
                (
                    rep.time,
                    rep.defect[0, 0],
                    rep.defect[0, 1],
                    rep.defect[1, 0],
                    rep.defect[1, 1],
                    rep.budget,
                    int(rep.any_flagged),
                )
                for rep in report.comparisons
            ],
        )


def _cmd_stability(mapping: dict, out: Path, two_waves: bool) -> int:
    settings = RunSettings.from_mapping(mapping)
    report = (
        run_two_wave_stability(settings) if two_waves else run_single_wave_stability(settings)
    )
    _write_stability_artifacts(report, out)
    _emit_summary(out, report.summary())
    return report.status


def _parse_values(raw) -> list[float]:
    if isinstance(raw, (int, float)):
        return [float(raw)]
    return [float(tok) for tok in str(raw).split(",") if tok.strip()]


def _cmd_sweep(mapping: dict, out: Path) -> int:
    mode = str(mapping.pop("mode", "stability-two"))
    if mode not in ("stability-two", "stability-single"):
        raise CliError(f"sweep mode must be stability-two or stability-single, got {mode!r}")
    alphas = sorted(_parse_values(mapping.pop("alpha", 1e-2)))
    sigmas = sorted(_parse_values(mapping.pop("sigma", 40.0)))
    rows = []
    for alpha in alphas:
        for sigma in sigmas:
            sub = dict(mapping)
            sub["alpha"] = alpha
            sub["sigma"] = sigma
            run_dir = out / f"run_alpha{alpha:g}_sigma{sigma:g}"
            run_dir.mkdir(parents=True, exist_ok=True)
            try:
                settings = RunSettings.from_mapping(sub)
                report = (
                    run_two_wave_stability(settings)
                    if mode == "stability-two"
                    else run_single_wave_stability(settings)
                )
                _write_stability_artifacts(report, run_dir)
                fieldio.write_summary(run_dir / "summary.txt", report.summary())
                t_star = "none" if report.exit_time is None else report.exit_time
                rows.append(
                    (
                        alpha,
                        sigma,
                        settings.p,
                        report.sup_eps_hhalf,
                        report.min_a0,
                        report.max_omega_drift,
                        t_star,
                    )
                )
            except (ValueError, KeyError, ConvergenceError, DecompositionError, EvolutionError) as err:
                fieldio.write_summary(run_dir / "summary.txt", {"error": err})
                rows.append((alpha, sigma, sub.get("p", ""), "", "", "", "failed"))
    fieldio.write_csv(
        out / "sweep.csv",
        ["alpha", "sigma", "p", "sup_eps", "min_A0", "max_omega_drift", "t_star"],
        rows,
    )
    flags = {"flag_alpha_monotonicity": 0, "flag_sigma_monotonicity": 0}
    table = {
        (row[0], row[1]): row[3] for row in rows if isinstance(row[3], float)
    }
    for sigma in sigmas:
        sups = [table.get((a, sigma)) for a in alphas]
        pairs = [(x, y) for x, y in zip(sups, sups[1:]) if x is not None and y is not None]
        if any(y < x for x, y in pairs):
            flags["flag_alpha_monotonicity"] = 1
    for alpha in alphas:
        sups = [table.get((alpha, s)) for s in sigmas]
        pairs = [(x, y) for x, y in zip(sups, sups[1:]) if x is not None and y is not None]
        if any(y > x for x, y in pairs):
            flags["flag_sigma_monotonicity"] = 1
    _emit_summary(out, {"mode": mode, "runs": len(rows), **flags})
    return 0


_HANDLERS = {
    "ground-state": _cmd_ground_state,
    "spectrum": _cmd_spectrum,
    "identities": _cmd_identities,
    "evolve": _cmd_evolve,
    "decompose": _cmd_decompose,
    "stability-single": lambda m, o: _cmd_stability(m, o, two_waves=False),
    "stability-two": lambda m, o: _cmd_stability(m, o, two_waves=True),
    "sweep": _cmd_sweep,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="halfwave",
        description="Solitary-wave experiments for the one-dimensional half-wave equation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _HANDLERS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="flat key = value configuration file")
        cmd.add_argument("--out", default=".", help="output directory")
        cmd.add_argument(
            "--set",
            action="append",
            dest="overrides",
            default=[],
            metavar="KEY=VALUE",
            help="override one config key (repeatable)",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        mapping: dict = {}
        if args.config:
            mapping.update(fieldio.parse_config(args.config))
        for item in args.overrides:
            if "=" not in item:
                raise CliError(f"--set expects KEY=VALUE, got {item!r}")
            key, _, raw = item.partition("=")
            mapping[key.strip()] = fieldio.coerce_value(raw.strip())
        for key in _REQUIRED[args.command]:
            if key not in mapping:
                raise CliError(f"missing required key {key!r} for {args.command}")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _HANDLERS[args.command](mapping, out)
    except (
        CliError,
        ValueError,
        KeyError,
        ConvergenceError,
        DecompositionError,
        EvolutionError,
        OSError,
    ) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
