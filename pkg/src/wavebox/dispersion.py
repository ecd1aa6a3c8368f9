"""Closed-form dispersion relations.

Covers the normalized fourth-order real wave equation, full and shallow
gravity-capillary waves, the capillary-only (free particle) limit, and the
box eigenmode wavenumbers. All functions accept scalars or numpy arrays.
"""

from __future__ import annotations

import numpy as np

from .params import HydroParams

# Above this depth-wavenumber product the shallow-water form is flagged
# as out of its validity range in CLI output.
SHALLOW_LIMIT_KH = 0.3


def rs_omega(k, epsilon):
    """Frequency of the normalized fourth-order wave equation.

    omega^2 = k^4 + eps k^2 + eps^2/4 is a perfect square, so the square
    root is evaluated as k^2 + eps/2 exactly (no cancellation at small k).
    """
    k = np.asarray(k, dtype=float)
    if np.any(np.asarray(epsilon) < 0):
        raise ValueError("epsilon must be >= 0")
    return k * k + epsilon / 2.0


def _check_positive_k(k):
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise ValueError("wavenumber must be > 0")
    return k


def gc_omega_full(k, h: HydroParams):
    """Finite-depth gravity-capillary frequency (physical units)."""
    k = _check_positive_k(k)
    return np.sqrt(np.tanh(k * h.H) * (h.sigma_over_rho * k**3 + h.g * k))


def gc_omega_shallow(k, h: HydroParams):
    """Shallow-water gravity-capillary frequency (physical units)."""
    k = _check_positive_k(k)
    return np.sqrt(h.sigma_over_rho * h.H * k**4 + h.g * h.H * k**2)


def capillary_only_omega(k, h: HydroParams):
    """Shallow capillary frequency with gravity excluded: the free-particle analog."""
    k = _check_positive_k(k)
    return np.sqrt(h.sigma_over_rho * h.H) * k * k


def box_eigen_wavenumbers(box_length: float, n_max: int) -> np.ndarray:
    """Wavenumbers pi*n/L of the sine eigenmodes of a box of size L."""
    if box_length <= 0:
        raise ValueError("box_length must be > 0")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return np.pi * np.arange(1, n_max + 1) / box_length


def dispersion_table(k_values, epsilon: float, h: HydroParams | None = None):
    """Rows (k, omega_rs, omega_gc_full, omega_gc_shallow) for CSV export.

    The gravity-capillary columns are NaN when no hydro parameters are given.
    """
    k = _check_positive_k(k_values)
    omega_rs = rs_omega(k, epsilon)
    if h is None:
        nan = np.full_like(k, np.nan)
        return np.column_stack([k, omega_rs, nan, nan])
    return np.column_stack([k, omega_rs, gc_omega_full(k, h), gc_omega_shallow(k, h)])
