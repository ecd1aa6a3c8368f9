"""Command-line entry point.

Subcommands: dispersion (closed-form curves), simulate (one run), sweep
(epsilon grid), analyze (post-process a run or sweep directory). Exit
codes: 0 success, 1 simulation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, io, figures
from .params import (NormalizedParams, HydroParams, parse_config_file,
                     params_from_config)
from .dispersion import dispersion_table, SHALLOW_LIMIT_KH
from .simulation import run_with_snapshots
from .statistics import (detect_peaks, phase_space, extract_energy_levels,
                         effective_box_length, eigen_energy_reference,
                         DEFAULT_PROMINENCE_FRACTION, DEFAULT_MIN_SEPARATION)
from .sweep import plan_sweep, execute, load_sweep, PROFILES

ENV_OUTPUT = "WAVEBOX_OUTPUT"


def _add_param_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("model parameters (override config file)")
    group.add_argument("--config", type=Path, help="flat key = value parameter file")
    group.add_argument("--epsilon", type=float)
    group.add_argument("--box-length", dest="box_length", type=float)
    group.add_argument("--damping-b", dest="damping_b", type=float)
    group.add_argument("--gamma0", type=float)
    group.add_argument("--alpha", type=float)
    group.add_argument("--n-modes", dest="n_modes", type=int)
    group.add_argument("--dt", type=float)
    group.add_argument("--t-final", dest="t_final", type=float)
    group.add_argument("--t-transient", dest="t_transient", type=float)
    group.add_argument("--particle-x0", dest="particle_x0", type=float)
    group.add_argument("--inertial", action="store_const", const=True, default=None)
    group.add_argument("--inertial-mass", dest="inertial_mass", type=float)
    group.add_argument("--drag", type=float)
    group.add_argument("--coupling", type=float)


_PARAM_KEYS = ("epsilon", "box_length", "damping_b", "gamma0", "alpha", "n_modes",
               "dt", "t_final", "t_transient", "particle_x0", "inertial",
               "inertial_mass", "drag", "coupling")


def _build_params(args, profile: str | None = None,
                  require_epsilon: bool = True) -> NormalizedParams:
    config = parse_config_file(args.config) if args.config else {}
    overrides = {key: getattr(args, key, None) for key in _PARAM_KEYS}
    if profile:
        prof = PROFILES[profile]
        for key in ("t_final", "t_transient"):
            if key not in config and overrides.get(key) is None:
                overrides[key] = prof[key]
    if not require_epsilon and "epsilon" not in config and overrides["epsilon"] is None:
        overrides["epsilon"] = PROFILES["desk"]["eps_min"]
    return params_from_config(config, overrides)


def _output_dir(args) -> Path:
    out = args.output or os.environ.get(ENV_OUTPUT)
    if not out:
        raise SystemExit2("an output directory is required (--output or "
                          f"${ENV_OUTPUT})")
    return Path(out)


class SystemExit2(Exception):
    """Usage error surfaced with exit code 2."""


def _parse_hydro(spec: str) -> HydroParams:
    fields = {"sigma_over_rho": None, "g": None, "H": None}
    for item in spec.split(","):
        if "=" not in item:
            raise SystemExit2(f"bad --hydro component {item!r}")
        key, value = item.split("=", 1)
        key = key.strip()
        if key not in fields:
            raise SystemExit2(f"unknown --hydro key {key!r} "
                              "(use sigma_over_rho, g, H)")
        fields[key] = float(value)
    missing = [k for k, v in fields.items() if v is None]
    if missing:
        raise SystemExit2(f"--hydro missing {', '.join(missing)}")
    return HydroParams(sigma=fields["sigma_over_rho"], rho=1.0,
                       g=fields["g"], H=fields["H"])


def cmd_dispersion(args) -> int:
    hydro = _parse_hydro(args.hydro) if args.hydro else None
    if args.k_min <= 0 or args.k_max <= args.k_min:
        raise SystemExit2("need 0 < --k-min < --k-max")
    k = np.linspace(args.k_min, args.k_max, args.points)
    table = dispersion_table(k, args.epsilon, hydro)
    if hydro is not None:
        worst = float(np.max(k) * hydro.H)
        if worst > SHALLOW_LIMIT_KH:
            print(f"warning: kH reaches {worst:.3g} > {SHALLOW_LIMIT_KH}; "
                  "shallow-water column is outside its validity range",
                  file=sys.stderr)
    header = ["k", "omega_rs", "omega_gc_full", "omega_gc_shallow"]
    if args.output:
        out = Path(args.output)
        io.write_csv(out / "dispersion.csv", header, table)
        if not args.no_figures:
            figures.dispersion_figure(table, args.epsilon, out / "dispersion.png")
        io.write_json(out / "manifest.json", io.base_manifest(
            kind="dispersion", epsilon=args.epsilon,
            k_min=args.k_min, k_max=args.k_max, points=args.points,
            hydro=args.hydro))
    else:
        sys.stdout.write(",".join(header) + "\n")
        for row in table:
            sys.stdout.write(",".join(io.fmt(v) for v in row) + "\n")
    return 0


def cmd_simulate(args) -> int:
    params = _build_params(args, profile=args.profile)
    out = _output_dir(args)
    snapshot_times = ([float(s) for s in args.snapshots.split(",")]
                      if args.snapshots else ())
    t0 = time.time()
    result = run_with_snapshots(params, snapshot_times)
    io.save_run(result, out, wall_clock_s=time.time() - t0)
    if not args.no_figures:
        figures.trajectory_figure(result, out / "trajectory.png")
        figures.snapshot_figure(result, out / "spatiotemporal.png")
    if result.failed:
        print(f"simulation failed: {result.failure_reason}", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(args) -> int:
    prof = PROFILES[args.profile]
    base = _build_params(args, profile=args.profile, require_epsilon=False)
    out = _output_dir(args)
    plan = plan_sweep(
        args.eps_min if args.eps_min is not None else prof["eps_min"],
        args.eps_max if args.eps_max is not None else prof["eps_max"],
        args.points if args.points is not None else prof["n_points"],
        base, parallelism=args.jobs, output_dir=out)
    result = execute(plan, resume=args.resume)
    if not args.no_figures:
        centers = result.runs[0].histogram.bin_centers
        figures.bifurcation_figure(result.epsilons, centers,
                                   result.bifurcation_map, out / "bifurcation_map.png")
        figures.kinetic_energy_figure(result.epsilons, result.kinetic,
                                      result.stability_mask, out / "kinetic_energy.png")
    n_failed = sum(1 for r in result.runs if r.failed)
    if n_failed:
        print(f"{n_failed} of {len(result.runs)} runs failed (see stability.csv)",
              file=sys.stderr)
    return 0


def _analyze_run(run_dir: Path, out: Path, args) -> int:
    result = io.load_run(run_dir)
    analysis = detect_peaks(result.histogram, args.prominence, args.separation)
    portrait = phase_space(result.t, result.x, result.v, result.params.t_transient)
    kinds = ["interior"] * len(analysis.peak_positions)
    if analysis.effective_boundaries is not None and len(kinds) >= 2:
        kinds[0] = kinds[-1] = "boundary"
    io.write_csv(out / "peaks.csv", ["position", "height", "kind"],
                 ((p, h, kind) for p, h, kind in
                  zip(analysis.peak_positions, analysis.peak_heights, kinds)))
    io.write_csv(out / "phase_space.csv", ["x_p", "v_p"],
                 zip(portrait.x, portrait.v))
    summary = {
        "kind": "run",
        "epsilon": result.epsilon,
        "escaped": result.escaped,
        "failed": result.failed,
        "mean_kinetic": result.mean_kinetic,
        "interior_peak_count": analysis.interior_peak_count,
        "effective_boundaries": analysis.effective_boundaries,
        "effective_length": analysis.effective_length,
        "peaks_flagged": analysis.flagged,
        "peaks_note": analysis.note,
        "period": portrait.period,
        "crossings_per_period": portrait.crossings_per_period,
    }
    io.write_json(out / "summary.json", io.base_manifest(**summary))
    if not args.no_figures:
        figures.pdf_peaks_figure(result.histogram, analysis, out / "pdf_peaks.png")
        figures.phase_space_figure(portrait, out / "phase_space.png")
    return 0


def _analyze_sweep(sweep_dir: Path, out: Path, args) -> int:
    result = load_sweep(sweep_dir)
    rows = []
    for r in result.runs:
        analysis = detect_peaks(r.histogram, args.prominence, args.separation)
        rows.append((r.epsilon, analysis.interior_peak_count,
                     analysis.effective_length if analysis.effective_length is not None
                     else float("nan"),
                     r.stable))
    io.write_csv(out / "peaks.csv",
                 ["epsilon", "interior_peak_count", "effective_length", "stable"],
                 rows)
    levels = extract_energy_levels(result, min_prominence_fraction=args.prominence,
                                   min_separation=args.separation)
    io.write_csv(out / "energy_levels.csv",
                 ["mode_number", "epsilon_n", "level_energy"],
                 zip(levels.mode_numbers, levels.epsilon_n, levels.level_energies))
    l_eff = effective_box_length(result.runs, args.prominence, args.separation)
    summary = {
        "kind": "sweep",
        "n_runs": len(result.runs),
        "n_stable": int(result.stability_mask.sum()),
        "effective_box_length": l_eff,
        "fit_coefficient": levels.fit_coefficient,
        "fit_quality": levels.fit_quality,
        "reference_coefficient": (eigen_energy_reference(1, l_eff) if l_eff else None),
        "levels_flagged": levels.flagged,
        "levels_note": levels.note,
    }
    io.write_json(out / "summary.json", io.base_manifest(**summary))
    if not args.no_figures:
        centers = result.runs[0].histogram.bin_centers
        figures.bifurcation_figure(result.epsilons, centers, result.bifurcation_map,
                                   out / "bifurcation_map.png",
                                   levels=levels.epsilon_n)
        figures.kinetic_energy_figure(result.epsilons, result.kinetic,
                                      result.stability_mask, out / "kinetic_energy.png",
                                      levels=levels.epsilon_n)
        if len(levels.mode_numbers):
            figures.energy_levels_figure(levels, l_eff, out / "energy_levels.png")
    return 0


def cmd_analyze(args) -> int:
    in_dir = Path(args.input)
    out = Path(args.output) if args.output else in_dir / "analysis"
    out.mkdir(parents=True, exist_ok=True)
    if (in_dir / "sweep_manifest.json").is_file():
        return _analyze_sweep(in_dir, out, args)
    if (in_dir / "manifest.json").is_file():
        return _analyze_run(in_dir, out, args)
    raise SystemExit2(f"{in_dir} is neither a run nor a sweep directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavebox",
        description="Wave-guided particle in a box: solver, sweeps and statistics")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dispersion", help="emit dispersion-relation tables")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--k-min", dest="k_min", type=float, default=0.05)
    p.add_argument("--k-max", dest="k_max", type=float, required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--hydro", help="sigma_over_rho=..,g=..,H=.. for the "
                                   "gravity-capillary columns")
    p.add_argument("--output", help="output directory (default: CSV to stdout)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("simulate", help="run one coupled wave-particle simulation")
    _add_param_flags(p)
    p.add_argument("--profile", choices=sorted(PROFILES), default="desk")
    p.add_argument("--snapshots", help="comma-separated field snapshot times")
    p.add_argument("--output", help=f"output directory (or ${ENV_OUTPUT})")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run an epsilon sweep")
    _add_param_flags(p)
    p.add_argument("--eps-min", dest="eps_min", type=float)
    p.add_argument("--eps-max", dest="eps_max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--profile", choices=sorted(PROFILES), default="desk")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--output", help=f"output directory (or ${ENV_OUTPUT})")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="post-process a run or sweep directory")
    p.add_argument("input")
    p.add_argument("--output")
    p.add_argument("--prominence", type=float, default=DEFAULT_PROMINENCE_FRACTION)
    p.add_argument("--separation", type=float, default=DEFAULT_MIN_SEPARATION)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
