"""The coupled wave-particle time loop for a single normalized potential.

Field modes advance with the exact damped-oscillator propagator plus a
linear-in-time forcing correction; the particle advances with the explicit
midpoint rule using the field propagated half a step. The run starts from a
flat field and a stationary particle, so motion only begins once waves
reflected from the walls break the symmetry around the particle.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import _kernel
from .params import NormalizedParams, EPSILON_MIN
from .statistics import PositionHistogram, build_histogram, mean_kinetic_energy
from .wavefield import WaveField, ModePropagator, forcing_overlap, mode_parity_signs

# trajectory sampling cadence in dimensionless time
SAMPLE_INTERVAL = 0.1


@dataclass
class FieldSnapshot:
    time: float
    x: np.ndarray
    xi: np.ndarray


@dataclass
class RunResult:
    """Everything produced by one simulation."""

    epsilon: float
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    histogram: PositionHistogram | None
    mean_kinetic: float | None
    escaped: bool
    escape_time: float | None
    failed: bool
    failure_reason: str
    params: NormalizedParams
    field_snapshots: list[FieldSnapshot] = dataclass_field(default_factory=list)

    @property
    def stable(self) -> bool:
        return not (self.escaped or self.failed)


def sample_stride(dt: float) -> int:
    return max(1, round(SAMPLE_INTERVAL / dt))


class _Setup:
    """Precomputed arrays shared by the kernel calls of one run."""

    def __init__(self, p: NormalizedParams):
        p = p.resolve()
        self.params = p
        n = p.n_modes
        self.k = np.pi * np.arange(1, n + 1) / p.box_length
        self.ss, self.cc = mode_parity_signs(n)
        omegas = self.k**2 + p.epsilon / 2.0
        self.prop_full = ModePropagator.build(omegas, p.damping_b, p.dt)
        self.prop_half = ModePropagator.build(omegas, p.damping_b, p.dt / 2.0)
        if p.gamma0 > 0 and p.epsilon >= EPSILON_MIN:
            self.overlap = forcing_overlap(self.k, p.epsilon)
            # modes beyond the overlap floor carry < 1e-17 of the forcing
            significant = np.nonzero(self.overlap > 1e-18)[0]
            self.n_forced = int(significant[-1]) + 1 if len(significant) else 0
            self.force_scale = p.gamma0 * p.epsilon * 2.0 / p.box_length
        else:
            self.overlap = np.zeros(n)
            self.n_forced = 0
            self.force_scale = 0.0
        self.n_steps = max(1, round(p.t_final / p.dt))
        self.stride = sample_stride(p.dt)

    def kernel_args(self):
        pf, ph = self.prop_full, self.prop_half
        return (self.k, self.ss, self.cc, self.overlap, self.n_forced,
                pf.p11, pf.p12, pf.p21, pf.p22,
                ph.p11, ph.p12, ph.p21, ph.p22,
                pf.inv_w2, pf.b_inv_w4,
                self.force_scale, 2.0 * self.params.epsilon, self.params.alpha,
                self.params.box_length / 2.0, self.stride)

    def field_from(self, a: np.ndarray, adot: np.ndarray) -> WaveField:
        p = self.params
        return WaveField(p.n_modes, p.box_length, p.epsilon, p.damping_b, a, adot)


def run(p: NormalizedParams) -> RunResult:
    """Integrate one run to t_final (or escape/blow-up) and post-process."""
    return run_with_snapshots(p, snapshot_times=())


def run_with_snapshots(p: NormalizedParams, snapshot_times=(),
                       snapshot_points: int = 512) -> RunResult:
    setup = _Setup(p)
    p = setup.params
    dt = p.dt

    for ts in snapshot_times:
        if not 0 <= ts <= p.t_final:
            raise ValueError(f"snapshot time {ts} outside [0, t_final]")
    snap_steps = sorted({min(setup.n_steps, round(ts / dt)) for ts in snapshot_times})

    a = np.zeros(p.n_modes)
    adot = np.zeros(p.n_modes)
    x_p = p.particle_x0
    v_p = 0.0

    n_samples_max = setup.n_steps // setup.stride + 1
    samples = np.empty((n_samples_max, 3))
    samples[0] = (0.0, x_p, 0.0)  # flat field: the particle starts at rest
    sample_idx = 1

    snapshots: list[FieldSnapshot] = []

    def capture(step_index):
        grid_x, xi = setup.field_from(a, adot).sample_grid(snapshot_points)
        snapshots.append(FieldSnapshot(step_index * dt, grid_x, xi))

    status = _kernel.RUNNING
    step_now = 0
    boundaries = sorted({s for s in snap_steps if s > 0} | {setup.n_steps})
    if 0 in snap_steps:
        capture(0)
    for boundary in boundaries:
        seg = boundary - step_now
        if seg > 0:
            x_p, v_p, status, steps_done, sample_idx = _kernel.advance(
                a, adot, x_p, v_p, step_now, seg, dt,
                *setup.kernel_args(),
                samples, sample_idx,
                p.inertial, p.inertial_mass, p.drag, p.coupling)
            step_now += steps_done
            if status != _kernel.RUNNING:
                break
        if boundary in snap_steps and status == _kernel.RUNNING:
            capture(boundary)

    t_arr = samples[:sample_idx, 0].copy()
    x_arr = samples[:sample_idx, 1].copy()
    v_arr = samples[:sample_idx, 2].copy()

    escaped = status == _kernel.ESCAPED
    failed = status == _kernel.BLOWUP
    escape_time = step_now * dt if escaped else None

    hist = build_histogram(t_arr, x_arr, p.t_transient, p.box_length)
    return RunResult(
        epsilon=p.epsilon,
        t=t_arr,
        x=x_arr,
        v=v_arr,
        histogram=hist,
        mean_kinetic=mean_kinetic_energy(t_arr, v_arr, p.t_transient),
        escaped=escaped,
        escape_time=escape_time,
        failed=failed,
        failure_reason="mode amplitude blow-up" if failed else "",
        params=p,
        field_snapshots=snapshots,
    )
