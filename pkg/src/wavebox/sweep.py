"""Sweep harness: many independent runs across an epsilon grid.

Runs are embarrassingly parallel; each worker persists its run directory
as soon as it finishes (manifest last), so an interrupted sweep resumes by
skipping every directory that already has a manifest. Results are merged
ordered by epsilon, never by completion time, so the assembled artifacts
are independent of worker count and scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .params import NormalizedParams, EPSILON_MIN
from .simulation import RunResult, run as run_simulation
from . import io

RUNS_SUBDIR = "runs"

# The desk profile keeps a full sweep tractable on one workstation and its
# epsilon window is calibrated to the band where the default coupling
# sustains confined wave-guided motion; the long profile extends both the
# integration time and the epsilon range for overnight surveys.
PROFILES = {
    "desk": {"t_final": 3000.0, "t_transient": 300.0, "eps_min": 0.35,
             "eps_max": 0.94, "n_points": 60},
    "long": {"t_final": 30000.0, "t_transient": 3000.0, "eps_min": 0.15,
             "eps_max": 3.2, "n_points": 300},
}


@dataclass(frozen=True)
class SweepPlan:
    epsilon_grid: tuple[float, ...]
    base_params: NormalizedParams
    parallelism: int = 1
    output_dir: str | None = None

    def __post_init__(self):
        grid = self.epsilon_grid
        if len(grid) < 1:
            raise ValueError("empty epsilon grid")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("epsilon grid must be strictly increasing")
        if grid[0] < EPSILON_MIN:
            raise ValueError(f"epsilon grid must stay >= {EPSILON_MIN}")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")

    def params_for(self, epsilon: float) -> NormalizedParams:
        return replace(self.base_params, epsilon=epsilon)


@dataclass
class SweepResult:
    runs: list[RunResult]
    bifurcation_map: np.ndarray
    stability_mask: np.ndarray

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([r.epsilon for r in self.runs])

    @property
    def kinetic(self) -> np.ndarray:
        return np.array([r.mean_kinetic if r.mean_kinetic is not None else np.nan
                         for r in self.runs])


def plan_sweep(eps_min: float, eps_max: float, n_points: int,
               base_params: NormalizedParams, parallelism: int = 1,
               output_dir=None) -> SweepPlan:
    """Uniform epsilon grid inclusive of both endpoints."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if not eps_max > eps_min:
        raise ValueError("need eps_max > eps_min")
    if eps_min < EPSILON_MIN:
        raise ValueError(f"eps_min must be >= {EPSILON_MIN}")
    grid = tuple(np.linspace(eps_min, eps_max, n_points).tolist())
    return SweepPlan(grid, base_params, parallelism,
                     str(output_dir) if output_dir is not None else None)


def run_dir_name(epsilon: float) -> str:
    return f"eps_{epsilon:.6f}"


def assemble_bifurcation_map(runs: list[RunResult]) -> np.ndarray:
    """Per-row max-normalized position PDFs; unusable rows are NaN."""
    if not runs:
        raise ValueError("no runs")
    n_bins = len(runs[0].histogram.density)
    rows = np.full((len(runs), n_bins), np.nan)
    any_stable = False
    for i, r in enumerate(runs):
        if r.stable and not r.histogram.empty:
            rows[i] = r.histogram.normalized_to_max()
            any_stable = True
    if not any_stable:
        raise ValueError("all runs escaped or failed; empty bifurcation map")
    return rows


def _execute_one(args) -> str:
    params_dict, out_dir = args
    import time as _time
    params = NormalizedParams.from_dict(params_dict)
    t0 = _time.time()
    result = run_simulation(params)
    io.save_run(result, Path(out_dir), wall_clock_s=_time.time() - t0)
    return out_dir


def _assemble(plan: SweepPlan, runs: list[RunResult]) -> SweepResult:
    stability = np.array([r.stable for r in runs], dtype=bool)
    return SweepResult(runs, assemble_bifurcation_map(runs), stability)


def execute(plan: SweepPlan, resume: bool = False) -> SweepResult:
    """Run every grid point (skipping completed ones when resuming)."""
    if plan.output_dir is None:
        raise ValueError("plan has no output directory")
    out = Path(plan.output_dir)
    runs_root = out / RUNS_SUBDIR
    runs_root.mkdir(parents=True, exist_ok=True)

    pending = []
    for eps in plan.epsilon_grid:
        run_dir = runs_root / run_dir_name(eps)
        if resume and io.run_is_complete(run_dir):
            continue
        pending.append((plan.params_for(eps).resolve().to_dict(), str(run_dir)))

    if pending:
        if plan.parallelism == 1:
            for job in pending:
                _execute_one(job)
        else:
            with ProcessPoolExecutor(max_workers=plan.parallelism) as pool:
                list(pool.map(_execute_one, pending))

    runs = [io.load_run(runs_root / run_dir_name(eps)) for eps in plan.epsilon_grid]
    result = _assemble(plan, runs)
    save_sweep_tables(result, out)
    io.write_json(out / "sweep_manifest.json", io.base_manifest(
        kind="sweep",
        epsilon_grid=list(plan.epsilon_grid),
        base_params=plan.base_params.to_dict(),
        parallelism=plan.parallelism,
        n_stable=int(result.stability_mask.sum()),
        n_runs=len(runs),
    ))
    return result


def save_sweep_tables(result: SweepResult, out: Path):
    out = Path(out)
    centers = result.runs[0].histogram.bin_centers
    header = ["epsilon"] + [f"x_{c:.6f}" for c in centers]
    io.write_csv(out / "bifurcation_map.csv", header,
                 ([r.epsilon] + list(row) for r, row in
                  zip(result.runs, result.bifurcation_map)))
    io.write_csv(out / "kinetic_energy.csv", ["epsilon", "mean_kinetic", "stable"],
                 ([r.epsilon,
                   r.mean_kinetic if r.mean_kinetic is not None else float("nan"),
                   r.stable] for r in result.runs))
    io.write_csv(out / "stability.csv",
                 ["epsilon", "escaped", "failed", "escape_time"],
                 ([r.epsilon, r.escaped, r.failed,
                   r.escape_time if r.escape_time is not None else float("nan")]
                  for r in result.runs))


def load_sweep(out_dir) -> SweepResult:
    """Rebuild a SweepResult from a persisted sweep directory."""
    out = Path(out_dir)
    manifest = io.read_json(out / "sweep_manifest.json")
    base = NormalizedParams.from_dict(manifest["base_params"])
    plan = SweepPlan(tuple(manifest["epsilon_grid"]), base,
                     manifest.get("parallelism", 1), str(out))
    runs = [io.load_run(out / RUNS_SUBDIR / run_dir_name(eps))
            for eps in plan.epsilon_grid]
    return _assemble(plan, runs)
