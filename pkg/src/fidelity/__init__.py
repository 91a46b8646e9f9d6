"""Dephasing-representation fidelity on the perturbed quantized standard map."""

__version__ = "0.1.0"

from .states import (
    TWO_PI,
    CoherentPair,
    DensityMatrix,
    Gaussian,
    IncoherentPair,
    MapParams,
    MomentumState,
    PositionState,
    RandomState,
    StateError,
    TorusPoint,
    spec_from_json,
    spec_to_json,
    wrap,
)
from .series import FidelitySeries

__all__ = [
    "TWO_PI",
    "CoherentPair",
    "DensityMatrix",
    "FidelitySeries",
    "Gaussian",
    "IncoherentPair",
    "MapParams",
    "MomentumState",
    "PositionState",
    "RandomState",
    "StateError",
    "TorusPoint",
    "spec_from_json",
    "spec_to_json",
    "wrap",
]
