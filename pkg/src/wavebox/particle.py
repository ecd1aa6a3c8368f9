"""Particle state and equations of motion.

Default mode is the massless guiding law: the particle velocity is
proportional to the local wave slope, v = -alpha * dxi/dx. An inertial
variant with linear drag is kept behind a flag.
"""

from __future__ import annotations

from dataclasses import dataclass

from .params import NormalizedParams
from .wavefield import WaveField


@dataclass
class ParticleState:
    x_p: float
    v_p: float = 0.0


def guide_velocity(field: WaveField, x_p: float, alpha: float) -> float:
    """Massless guiding law: slide down the local wave slope."""
    return -alpha * float(field.evaluate_gradient(x_p))


def step_particle(field_now: WaveField, field_mid: WaveField, state: ParticleState,
                  dt: float, p: NormalizedParams) -> ParticleState:
    """Advance the particle by dt with the explicit midpoint rule.

    field_mid must be the wave field advanced to t + dt/2; the caller owns
    that half-step propagation.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if not p.inertial:
        v0 = guide_velocity(field_now, state.x_p, p.alpha)
        x_mid = state.x_p + 0.5 * dt * v0
        if abs(x_mid) > p.box_length / 2:
            # escaping mid-step: let the caller detect it from the new position
            return ParticleState(x_p=x_mid + 0.5 * dt * v0, v_p=v0)
        v_mid = guide_velocity(field_mid, x_mid, p.alpha)
        x_new = state.x_p + dt * v_mid
        return ParticleState(x_p=x_new, v_p=v_mid)

    m, drag, f = p.inertial_mass, p.drag, p.coupling

    def accel(field, x, v):
        return (-drag * v - f * float(field.evaluate_gradient(x))) / m

    x0, v0 = state.x_p, state.v_p
    a0 = accel(field_now, x0, v0)
    x_mid = x0 + 0.5 * dt * v0
    v_half = v0 + 0.5 * dt * a0
    if abs(x_mid) > p.box_length / 2:
        return ParticleState(x_p=x_mid + 0.5 * dt * v_half, v_p=v_half)
    a_mid = accel(field_mid, x_mid, v_half)
    return ParticleState(x_p=x0 + dt * v_half, v_p=v0 + dt * a_mid)
