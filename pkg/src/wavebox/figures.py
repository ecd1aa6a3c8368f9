"""Matplotlib figure rendering for the report paths.

Each function writes a PNG next to the delimited output it illustrates.
Figures are a convenience view; the CSV files remain the artifacts of
record.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def dispersion_figure(table: np.ndarray, epsilon: float, path: Path):
    """Overlay of the dispersion branches from a dispersion_table array."""
    k = table[:, 0]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(k, table[:, 1], label=f"normalized 4th-order (eps={epsilon:g})")
    if np.isfinite(table[:, 2]).any():
        ax.plot(k, table[:, 2], "--", label="gravity-capillary, full depth")
        ax.plot(k, table[:, 3], ":", label="gravity-capillary, shallow")
    ax.set_xlabel("k")
    ax.set_ylabel("omega")
    ax.legend(fontsize=8)
    _save(fig, path)


def trajectory_figure(result, path: Path):
    """Particle trajectory with the position PDF projected alongside."""
    fig, (ax_t, ax_p) = plt.subplots(
        1, 2, figsize=(7, 3.5), sharey=True,
        gridspec_kw={"width_ratios": [3, 1]})
    ax_t.plot(result.t, result.x, lw=0.4)
    ax_t.set_xlabel("t")
    ax_t.set_ylabel("x_p")
    half = result.params.box_length / 2
    ax_t.set_ylim(-half, half)
    hist = result.histogram
    if hist is not None and not hist.empty:
        ax_p.plot(hist.density, hist.bin_centers, lw=0.8)
        ax_p.set_xlabel("PDF")
    title = f"eps = {result.epsilon:g}"
    if result.escaped:
        title += f" (escaped at t = {result.escape_time:.1f})"
    fig.suptitle(title, fontsize=10)
    _save(fig, path)


def snapshot_figure(result, path: Path):
    """Spatio-temporal view: field snapshots stacked over the trajectory."""
    if not result.field_snapshots:
        return
    fig, ax = plt.subplots(figsize=(5, 4))
    times = [s.time for s in result.field_snapshots]
    grid = np.array([s.xi for s in result.field_snapshots])
    x = result.field_snapshots[0].x
    mesh = ax.pcolormesh(x, times, grid, shading="auto", cmap="RdBu_r")
    fig.colorbar(mesh, ax=ax, label="xi")
    ax.plot(result.x, result.t, "k", lw=0.5)
    ax.set_ylim(min(times), max(times))
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    _save(fig, path)


def phase_space_figure(portrait, path: Path):
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.plot(portrait.x, portrait.v, lw=0.3)
    ax.set_xlabel("x_p")
    ax.set_ylabel("v_p")
    if portrait.period is not None:
        ax.set_title(f"period = {portrait.period:.2f}, "
                     f"crossings/period = {portrait.crossings_per_period}", fontsize=9)
    _save(fig, path)


def pdf_peaks_figure(hist, analysis, path: Path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(hist.bin_centers, hist.density, lw=0.8)
    if len(analysis.peak_positions):
        ax.plot(analysis.peak_positions, analysis.peak_heights, "rv", ms=5)
    if analysis.effective_boundaries is not None:
        for xb in analysis.effective_boundaries:
            ax.axvline(xb, color="r", lw=0.6, ls="--")
    ax.set_xlabel("x")
    ax.set_ylabel("PDF")
    _save(fig, path)


def bifurcation_figure(epsilons, bin_centers, bifurcation_map, path: Path,
                       levels=None):
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    mesh = ax.pcolormesh(bin_centers, epsilons, bifurcation_map,
                         shading="auto", cmap="magma")
    fig.colorbar(mesh, ax=ax, label="PDF / PDF_max")
    if levels is not None:
        for eps_n in levels:
            ax.axhline(eps_n, color="w", lw=0.5, ls=":")
    ax.set_xlabel("x")
    ax.set_ylabel("epsilon")
    _save(fig, path)


def kinetic_energy_figure(epsilons, kinetic, stable_mask, path: Path,
                          levels=None):
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    eps = np.asarray(epsilons)
    ek = np.asarray(kinetic)
    stable = np.asarray(stable_mask, dtype=bool)
    ax.plot(eps, ek, color="0.7", lw=0.7)
    ax.plot(eps[stable], ek[stable], "k.", ms=4, label="stable")
    ax.plot(eps[~stable], ek[~stable], "rx", ms=4, label="escaped/failed")
    if levels is not None:
        for eps_n in levels:
            ax.axvline(eps_n, color="g", alpha=0.3, lw=4)
    ax.set_xlabel("epsilon")
    ax.set_ylabel("mean kinetic energy")
    ax.legend(fontsize=8)
    _save(fig, path)


def energy_levels_figure(levels, box_length_eff, path: Path):
    from .statistics import eigen_energy_reference

    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    n = levels.mode_numbers
    ax.plot(n, levels.level_energies, "ko", label="measured plateau energy")
    if box_length_eff:
        ref = [eigen_energy_reference(int(m), box_length_eff) for m in n]
        ax.plot(n, ref, "r--", label=f"2 pi^2 n^2 / L_eff^2, L_eff={box_length_eff:.2f}")
    ax.plot(n, levels.fit_coefficient * n.astype(float) ** 2, "b:",
            label=f"fit C n^2, C={levels.fit_coefficient:.4g}")
    ax.set_xlabel("mode number n")
    ax.set_ylabel("energy")
    ax.legend(fontsize=8)
    _save(fig, path)
