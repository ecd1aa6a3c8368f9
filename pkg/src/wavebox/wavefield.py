"""Spectral wave field on the box and its exact-in-time mode propagator.

The field is expanded in sine modes sin(k_m (x + L/2)), k_m = pi m / L,
which satisfy the simply-supported conditions xi = xi_xx = 0 at both walls
and diagonalize the fourth-order spatial operator. Each mode obeys a damped
driven oscillator a'' + b a' + w^2 a = F(t); the homogeneous part is
advanced by its closed-form matrix exponential, and the forcing enters
through the exact particular solution for linear-in-time F. A second-order
finite-difference leapfrog solver for the coupled real/imaginary first-order
system is included as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import NormalizedParams, EPSILON_MIN
from .dispersion import rs_omega

# Mode amplitude beyond which a run is declared numerically blown up.
BLOWUP_AMPLITUDE = 1.0e6


class FieldBlowUpError(RuntimeError):
    """Raised when mode coefficients leave the finite/sane range."""


def mode_parity_signs(n_modes: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact split sin(k_m (x + L/2)) = ss_m sin(k_m x) + cc_m cos(k_m x).

    Because k_m L/2 = m pi/2, the phase shift is a quarter-turn multiple:
    each mode is exactly +-sin(k_m x) (even m) or +-cos(k_m x) (odd m).
    Evaluating through this split keeps the basis numerically even/odd about
    the box center, so mirror-symmetric runs negate bitwise.
    """
    m = np.arange(1, n_modes + 1)
    ss = np.where(m % 4 == 0, 1.0, np.where(m % 4 == 2, -1.0, 0.0))  # cos(m pi/2)
    cc = np.where(m % 4 == 1, 1.0, np.where(m % 4 == 3, -1.0, 0.0))  # sin(m pi/2)
    return ss, cc


def gaussian_width(epsilon: float) -> float:
    """Dimensionless width of the particle's Gaussian footprint, pi/sqrt(eps)."""
    if epsilon < EPSILON_MIN:
        raise ValueError(f"forcing undefined below epsilon = {EPSILON_MIN}")
    return math.pi / math.sqrt(epsilon)


def forcing_overlap(k, epsilon: float):
    """Gaussian-sine overlap factor exp(-k^2 a^2 / 4) with a = pi/sqrt(eps).

    This is the infinite-domain integral of the unit Gaussian against a sine
    mode; the tails truncated by the walls are exponentially small while the
    particle stays a few widths away from them.
    """
    a = gaussian_width(epsilon)
    k = np.asarray(k, dtype=float)
    return np.exp(-0.25 * (k * a) ** 2)


def project_forcing(x_p: float, t: float, p: NormalizedParams, k: np.ndarray) -> np.ndarray:
    """Sine-Galerkin coefficients of the localized particle forcing.

    F_m(t) = -gamma0 * eps * sin(2 eps t) * (2/L) * exp(-k_m^2 a^2/4)
             * sin(k_m (x_p + L/2))
    """
    L = p.box_length
    if abs(x_p) >= L / 2:
        raise ValueError(f"particle position {x_p} outside the box")
    amp = -p.gamma0 * p.epsilon * math.sin(2.0 * p.epsilon * t) * (2.0 / L)
    ss, cc = mode_parity_signs(len(k))
    profile = ss * np.sin(k * x_p) + cc * np.cos(k * x_p)
    return amp * forcing_overlap(k, p.epsilon) * profile


@dataclass(frozen=True)
class ModePropagator:
    """Exact one-step update for a'' + b a' + w^2 a = F, F linear in t.

    All arrays are per-mode. p11..p22 is the homogeneous matrix exponential
    over dt; the particular solution for F(t) = F0 + (F1-F0) t/dt is
    a_p(t) = F(t)/w^2 - b (F1-F0)/(dt w^4), a_p' = (F1-F0)/(dt w^2),
    which satisfies the ODE identically, so the only time-discretization
    error is the linear interpolation of F itself.
    """

    dt: float
    p11: np.ndarray
    p12: np.ndarray
    p21: np.ndarray
    p22: np.ndarray
    inv_w2: np.ndarray
    b_inv_w4: np.ndarray

    @classmethod
    def build(cls, omegas: np.ndarray, damping_b: float, dt: float) -> "ModePropagator":
        if dt <= 0:
            raise ValueError("dt must be > 0")
        w2 = np.asarray(omegas, dtype=float) ** 2
        if np.any(w2 <= 0):
            raise ValueError("mode frequencies must be positive")
        b = float(damping_b)
        # Complex arithmetic covers under-, over- and critically damped modes
        # in one expression: cos(i x) = cosh(x).
        wd = np.sqrt(w2 - b * b / 4.0 + 0j)
        phase = wd * dt
        c = np.cos(phase)
        s = np.where(np.abs(wd) > 1e-300, np.sin(phase) / np.where(wd == 0, 1, wd), dt)
        decay = math.exp(-b * dt / 2.0)
        inv_w2 = 1.0 / w2
        return cls(
            dt=dt,
            p11=(decay * (c + (b / 2.0) * s)).real,
            p12=(decay * s).real,
            p21=(decay * (-w2 * s)).real,
            p22=(decay * (c - (b / 2.0) * s)).real,
            inv_w2=inv_w2,
            b_inv_w4=b * inv_w2 * inv_w2,
        )

    def step(self, a, adot, forcing_now, forcing_next):
        """Advance (a, adot) by dt. Returns new arrays."""
        slope = (forcing_next - forcing_now) / self.dt
        ap_dot = slope * self.inv_w2
        shift = slope * self.b_inv_w4
        y = a - (forcing_now * self.inv_w2 - shift)
        ydot = adot - ap_dot
        a_new = self.p11 * y + self.p12 * ydot + forcing_next * self.inv_w2 - shift
        adot_new = self.p21 * y + self.p22 * ydot + ap_dot
        return a_new, adot_new


class WaveField:
    """Sine-mode representation of the real wave field on the box."""

    def __init__(self, n_modes: int, box_length: float, epsilon: float, damping_b: float,
                 coeffs: np.ndarray | None = None, coeff_rates: np.ndarray | None = None):
        if n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        self.box_length = float(box_length)
        self.epsilon = float(epsilon)
        self.damping_b = float(damping_b)
        self.mode_wavenumbers = np.pi * np.arange(1, n_modes + 1) / self.box_length
        self.omegas = rs_omega(self.mode_wavenumbers, self.epsilon)
        self.parity_ss, self.parity_cc = mode_parity_signs(n_modes)
        self.coeffs = np.zeros(n_modes) if coeffs is None else np.array(coeffs, dtype=float)
        self.coeff_rates = (np.zeros(n_modes) if coeff_rates is None
                            else np.array(coeff_rates, dtype=float))
        if self.coeffs.shape != (n_modes,) or self.coeff_rates.shape != (n_modes,):
            raise ValueError("coefficient arrays must have length n_modes")
        self._propagators: dict[float, ModePropagator] = {}

    @property
    def n_modes(self) -> int:
        return len(self.coeffs)

    def copy(self) -> "WaveField":
        return WaveField(self.n_modes, self.box_length, self.epsilon, self.damping_b,
                         self.coeffs, self.coeff_rates)

    def _check_x(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(np.abs(x) > self.box_length / 2):
            raise ValueError("position outside the box")
        return x

    def evaluate(self, x):
        """Field value xi(x) = sum_m a_m sin(k_m (x + L/2))."""
        x = self._check_x(x)
        phases = np.multiply.outer(x, self.mode_wavenumbers)
        profiles = np.sin(phases) * self.parity_ss + np.cos(phases) * self.parity_cc
        return profiles @ self.coeffs

    def evaluate_gradient(self, x):
        """Spatial slope d(xi)/dx = sum_m a_m k_m cos(k_m (x + L/2))."""
        x = self._check_x(x)
        phases = np.multiply.outer(x, self.mode_wavenumbers)
        slopes = np.cos(phases) * self.parity_ss - np.sin(phases) * self.parity_cc
        return slopes @ (self.coeffs * self.mode_wavenumbers)

    def total_energy(self) -> float:
        """Sum over modes of (adot^2 + w^2 a^2)/2; conserved when b=0, F=0."""
        return 0.5 * float(np.sum(self.coeff_rates**2 + (self.omegas * self.coeffs) ** 2))

    def propagator(self, dt: float) -> ModePropagator:
        prop = self._propagators.get(dt)
        if prop is None:
            prop = ModePropagator.build(self.omegas, self.damping_b, dt)
            self._propagators[dt] = prop
        return prop

    def step(self, forcing_now: np.ndarray, forcing_next: np.ndarray, dt: float) -> "WaveField":
        """Advance the field by dt under forcing linearly interpolated in time."""
        a, adot = self.propagator(dt).step(self.coeffs, self.coeff_rates,
                                           np.asarray(forcing_now, dtype=float),
                                           np.asarray(forcing_next, dtype=float))
        if not (np.all(np.isfinite(a)) and np.max(np.abs(a)) < BLOWUP_AMPLITUDE):
            raise FieldBlowUpError("mode coefficients diverged")
        out = WaveField(self.n_modes, self.box_length, self.epsilon, self.damping_b, a, adot)
        out._propagators = self._propagators
        return out

    def sample_grid(self, n_points: int = 512):
        """(x, xi) on a uniform plotting grid spanning the box."""
        x = np.linspace(-self.box_length / 2, self.box_length / 2, n_points)
        return x, self.evaluate(x)


def oracle_complex_split_evolve(xi0, theta0, epsilon: float, box_length: float,
                                t_final: float, dt: float | None = None):
    """Evolve the coupled first-order real/imaginary system by leapfrog.

    The fields live on a uniform grid spanning the box including both walls,
    where they are pinned to zero. L u = u_xx - (eps/2) u with second-order
    central differences; xi and theta are advanced staggered in time. Returns
    (x_grid, xi at t_final).

    Independent of the spectral solver: different discretization, different
    formulation (first-order system vs second-order modes).
    """
    xi = np.array(xi0, dtype=float)
    theta = np.array(theta0, dtype=float)
    if xi.shape != theta.shape or xi.ndim != 1 or len(xi) < 4:
        raise ValueError("xi0 and theta0 must be equal-length 1D arrays, >= 4 points")
    n = len(xi)
    x = np.linspace(-box_length / 2, box_length / 2, n)
    h = x[1] - x[0]
    if abs(xi[0]) > 0 or abs(xi[-1]) > 0 or abs(theta[0]) > 0 or abs(theta[-1]) > 0:
        raise ValueError("initial data must vanish on the boundary")

    spectral_radius = 4.0 / h**2 + epsilon / 2.0
    dt_max = 2.0 / spectral_radius
    if dt is None:
        dt = 0.5 * dt_max
    elif dt > dt_max:
        raise ValueError(f"dt = {dt} violates the stability limit {dt_max}")
    n_steps = max(1, math.ceil(t_final / dt))
    dt = t_final / n_steps

    def apply_l(u):
        out = np.zeros_like(u)
        out[1:-1] = (u[:-2] - 2.0 * u[1:-1] + u[2:]) / h**2 - (epsilon / 2.0) * u[1:-1]
        return out

    # second-order accurate half-step initialization of theta
    theta_half = theta + (dt / 2.0) * apply_l(xi) - (dt**2 / 8.0) * apply_l(apply_l(theta))
    for _ in range(n_steps):
        xi = xi - dt * apply_l(theta_half)
        theta_half = theta_half + dt * apply_l(xi)
    return x, xi
