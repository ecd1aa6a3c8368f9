"""Wave-guided particle in a box.

A deterministic simulator of a localized oscillating particle coupled to a
fourth-order shallow-water / real-Schrodinger wave field on a finite box,
plus the statistics pipeline (position PDFs, phase space, energy levels,
bifurcation maps) and a resumable parameter-sweep harness.
"""

__version__ = "0.1.0"

from .params import QuantumParams, HydroParams, NormalizedParams
from .wavefield import WaveField
from .simulation import RunResult, run

__all__ = [
    "QuantumParams",
    "HydroParams",
    "NormalizedParams",
    "WaveField",
    "RunResult",
    "run",
]
