"""Trajectory post-processing: PDFs, peaks, kinetic energy, energy levels.

Everything here is a pure function over sampled trajectory data; nothing
mutates run results, so post-processing can be parallelized freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

DEFAULT_N_BINS = 200
# calibrated against the default-coupling sweep: the mode peaks of
# box-filling states carry ~10-20% of the PDF maximum in prominence
DEFAULT_PROMINENCE_FRACTION = 0.1
DEFAULT_MIN_SEPARATION = 0.5
DEFAULT_SMOOTHING_WINDOW = 5


@dataclass
class PositionHistogram:
    """Normalized position PDF over the box."""

    bin_edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    n_samples: int

    @property
    def empty(self) -> bool:
        return self.n_samples == 0

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    def normalized_to_max(self) -> np.ndarray:
        """Density scaled by its own maximum (bifurcation-map rows)."""
        peak = self.density.max() if len(self.density) and self.density.max() > 0 else 1.0
        return self.density / peak


@dataclass
class ModeAnalysis:
    """Peak structure of a position PDF."""

    peak_positions: np.ndarray
    peak_heights: np.ndarray
    interior_peak_count: int
    effective_boundaries: tuple[float, float] | None
    effective_length: float | None
    flagged: bool = False
    note: str = ""


@dataclass
class PhaseSpacePortrait:
    x: np.ndarray
    v: np.ndarray
    period: float | None
    crossings_per_period: int | None


@dataclass
class EnergyLevels:
    """Discrete levels extracted from the kinetic-energy minima of a sweep."""

    epsilon_n: np.ndarray
    mode_numbers: np.ndarray
    level_energies: np.ndarray
    fit_coefficient: float
    fit_quality: float
    flagged: bool = False
    note: str = ""


def build_histogram(t, x, t_transient: float, box_length: float,
                    n_bins: int = DEFAULT_N_BINS) -> PositionHistogram:
    """Uniform-bin position PDF from post-transient trajectory samples.

    The density integrates to one whenever any samples survive the
    transient cut; an empty selection yields an explicit empty histogram.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    edges = np.linspace(-box_length / 2, box_length / 2, n_bins + 1)
    keep = x[t >= t_transient]
    if len(keep) == 0:
        zeros = np.zeros(n_bins)
        return PositionHistogram(edges, zeros.copy(), zeros, 0)
    counts, _ = np.histogram(keep, bins=edges)
    width = edges[1] - edges[0]
    density = counts / (len(keep) * width)
    return PositionHistogram(edges, counts.astype(float), density, len(keep))


def detect_peaks(hist: PositionHistogram,
                 min_prominence_fraction: float = DEFAULT_PROMINENCE_FRACTION,
                 min_separation: float = DEFAULT_MIN_SEPARATION) -> ModeAnalysis:
    """Locate PDF peaks and classify the outermost two as effective walls.

    Prominence is relative to the density maximum, so the result is
    invariant under uniform rescaling of the density.
    """
    density = hist.density
    if hist.empty or density.max() <= 0:
        return ModeAnalysis(np.array([]), np.array([]), 0, None, None,
                            flagged=True, note="empty histogram")
    distance = max(1, int(math.ceil(min_separation / hist.bin_width)))
    idx, _ = find_peaks(density, prominence=min_prominence_fraction * density.max(),
                        distance=distance)
    centers = hist.bin_centers
    positions = centers[idx]
    heights = density[idx]
    if len(idx) < 2:
        return ModeAnalysis(positions, heights, len(idx), None, None,
                            flagged=True, note="fewer than 2 peaks; no effective walls")
    left, right = positions[0], positions[-1]
    return ModeAnalysis(
        peak_positions=positions,
        peak_heights=heights,
        interior_peak_count=len(idx) - 2,
        effective_boundaries=(float(left), float(right)),
        effective_length=float(right - left),
    )


def mean_kinetic_energy(t, v, t_transient: float) -> float | None:
    """Time-averaged v^2/2 over the post-transient trajectory.

    In dimensionless variables the normalization prefactors are unity.
    Returns None when nothing survives the transient cut.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    keep = v[t >= t_transient]
    if len(keep) == 0:
        return None
    return float(np.mean(keep**2) / 2.0)


def phase_space(t, x, v, t_transient: float = 0.0,
                recurrence_tol: float = 0.05) -> PhaseSpacePortrait:
    """Post-transient (x, v) portrait with a recurrence period estimate.

    The period is the first return of the normalized (x, v) point to within
    ``recurrence_tol`` of its start, after having first moved away by at
    least 10x the tolerance. Crossings count sign changes of x over one
    period (wall-to-wall traversals).
    """
    t = np.asarray(t, dtype=float)
    keep = t >= t_transient
    xs = np.asarray(x, dtype=float)[keep]
    vs = np.asarray(v, dtype=float)[keep]
    ts = t[keep]
    if len(xs) < 3:
        return PhaseSpacePortrait(xs, vs, None, None)

    x_scale = np.std(xs) or 1.0
    v_scale = np.std(vs) or 1.0
    dx = (xs - xs[0]) / x_scale
    dv = (vs - vs[0]) / v_scale
    dist = np.hypot(dx, dv)
    away = dist > 10.0 * recurrence_tol
    if not away.any():
        return PhaseSpacePortrait(xs, vs, None, None)
    first_away = int(np.argmax(away))
    back = dist[first_away:] < recurrence_tol
    if not back.any():
        return PhaseSpacePortrait(xs, vs, None, None)
    ret = first_away + int(np.argmax(back))
    period = float(ts[ret] - ts[0])

    seg = xs[: ret + 1]
    signs = np.sign(seg)
    signs = signs[signs != 0]
    crossings = int(np.sum(signs[1:] != signs[:-1])) if len(signs) > 1 else 0
    return PhaseSpacePortrait(xs, vs, period, crossings)


def eigen_energy_reference(n: int, box_length: float) -> float:
    """Particle-in-a-box level energy 2 pi^2 n^2 / L^2 (units of well depth)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if box_length <= 0:
        raise ValueError("box_length must be > 0")
    return 2.0 * math.pi**2 * n**2 / box_length**2


def moving_median(values: np.ndarray, window: int) -> np.ndarray:
    """Centered moving median; shrinks the window near the edges."""
    values = np.asarray(values, dtype=float)
    half = window // 2
    out = np.empty_like(values)
    for i in range(len(values)):
        lo = max(0, i - half)
        hi = min(len(values), i + half + 1)
        out[i] = np.median(values[lo:hi])
    return out


def local_minima(values: np.ndarray) -> list[int]:
    """Indices of strict local minima, plateau-aware.

    Median smoothing routinely produces short flat stretches; a run of
    equal values counts as one minimum (reported at its center) when both
    neighbors of the run are larger.
    """
    values = np.asarray(values, dtype=float)
    out: list[int] = []
    i = 1
    while i < len(values) - 1:
        if values[i] < values[i - 1]:
            j = i
            while j + 1 < len(values) and values[j + 1] == values[i]:
                j += 1
            if j + 1 < len(values) and values[j + 1] > values[i]:
                out.append((i + j) // 2)
            i = j + 1
        else:
            i += 1
    return out


def _quadratic_fit(n: np.ndarray, e: np.ndarray) -> tuple[float, float]:
    """Least-squares C for e = C n^2 and the coefficient of determination."""
    n2 = n.astype(float) ** 2
    coeff = float(np.sum(e * n2) / np.sum(n2 * n2))
    resid = e - coeff * n2
    ss_tot = float(np.sum((e - e.mean()) ** 2))
    if ss_tot == 0:
        quality = 1.0 if np.allclose(resid, 0) else 0.0
    else:
        quality = 1.0 - float(np.sum(resid**2)) / ss_tot
    return coeff, quality


def extract_energy_levels(sweep,
                          smoothing_window: int = DEFAULT_SMOOTHING_WINDOW,
                          min_prominence_fraction: float = DEFAULT_PROMINENCE_FRACTION,
                          min_separation: float = DEFAULT_MIN_SEPARATION) -> EnergyLevels:
    """Discrete energy levels from the kinetic-energy minima of a sweep.

    Stable (non-escaped, non-failed) runs are ordered by epsilon, their
    mean kinetic energy is median-smoothed, and local-minimum plateaus are
    matched with the interior PDF peak count of the run at the minimum,
    which serves as the mode number n. A one-parameter quadratic law
    E = C n^2 is then fitted through the plateau energies.
    """
    runs = [r for r in sweep.runs
            if not r.escaped and not r.failed and r.mean_kinetic is not None]
    runs.sort(key=lambda r: r.epsilon)
    empty = EnergyLevels(np.array([]), np.array([], dtype=int), np.array([]),
                         math.nan, math.nan, flagged=True)
    if len(runs) < 10:
        empty.note = f"only {len(runs)} stable runs; need >= 10"
        return empty

    eps = np.array([r.epsilon for r in runs])
    e_k = np.array([r.mean_kinetic for r in runs])
    smooth = moving_median(e_k, smoothing_window)

    minima = local_minima(smooth)
    if not minima:
        empty.note = "no local minima in the smoothed kinetic energy"
        return empty

    flagged = False
    notes = []
    eps_n, modes, energies = [], [], []
    for i in minima:
        analysis = detect_peaks(runs[i].histogram, min_prominence_fraction, min_separation)
        n = 0 if analysis.flagged else analysis.interior_peak_count
        if n < 1:
            flagged = True
            notes.append(f"minimum at eps={eps[i]:.4g} has no interior peaks; skipped")
            continue
        if modes and n <= modes[-1]:
            flagged = True
            notes.append(f"mode number not increasing at eps={eps[i]:.4g}; skipped")
            continue
        eps_n.append(eps[i])
        modes.append(n)
        energies.append(smooth[i])

    if len(modes) < 2:
        empty.note = "; ".join(notes) or "fewer than 2 usable levels"
        return empty

    coeff, quality = _quadratic_fit(np.array(modes), np.array(energies))
    return EnergyLevels(
        epsilon_n=np.array(eps_n),
        mode_numbers=np.array(modes, dtype=int),
        level_energies=np.array(energies),
        fit_coefficient=coeff,
        fit_quality=quality,
        flagged=flagged,
        note="; ".join(notes),
    )


def effective_box_length(runs,
                         min_prominence_fraction: float = DEFAULT_PROMINENCE_FRACTION,
                         min_separation: float = DEFAULT_MIN_SEPARATION) -> float | None:
    """Median effective box length over the stable runs of a sweep."""
    lengths = []
    for r in runs:
        if r.escaped or r.failed or r.histogram is None:
            continue
        analysis = detect_peaks(r.histogram, min_prominence_fraction, min_separation)
        if analysis.effective_length is not None:
            lengths.append(analysis.effective_length)
    if not lengths:
        return None
    return float(np.median(lengths))
