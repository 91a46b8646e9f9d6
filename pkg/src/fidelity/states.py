"""System parameters, torus points and declarative initial-state descriptions.

Angles are stored in radians.  The JSON form of a state uses units of pi,
so ``{"type": "gaussian", "Q": 0.7, "P": 0.4, "sigma": 0.004}`` means
Q = 0.7*pi and so on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

TWO_PI = 2.0 * math.pi


class StateError(ValueError):
    """Invalid or degenerate state description."""


def wrap(x):
    """Reduce angles to [0, 2*pi).  Works on floats and arrays."""
    r = np.mod(x, TWO_PI)
    # np.mod can round tiny negatives up to exactly 2*pi
    r = np.where(r >= TWO_PI, r - TWO_PI, r)
    if np.ndim(r) == 0:
        return float(r)
    return r


class TorusPoint(NamedTuple):
    """Phase-space point (q, p) on the 2-torus.  Fields may be arrays."""

    q: float
    p: float

    def wrapped(self) -> "TorusPoint":
        return TorusPoint(wrap(self.q), wrap(self.p))


@dataclass(frozen=True)
class MapParams:
    """Perturbed standard map: Hilbert dimension, kick and perturbation strengths.

    ``hbar`` defaults to 2*pi/n so that n Planck cells tile the [0, 2*pi)^2 torus.
    """

    n: int
    k: float
    epsilon: float = 0.0
    hbar: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise StateError(f"Hilbert dimension must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.hbar is None:
            object.__setattr__(self, "hbar", TWO_PI / self.n)
        elif not self.hbar > 0:
            raise StateError(f"hbar must be positive, got {self.hbar}")

    def with_epsilon(self, epsilon: float) -> "MapParams":
        return MapParams(self.n, self.k, epsilon, self.hbar)

    @property
    def dq(self) -> float:
        """Position-grid spacing."""
        return TWO_PI / self.n

    def position_grid(self) -> np.ndarray:
        return self.dq * np.arange(self.n)

    def momentum_integers(self) -> np.ndarray:
        """Integer labels l of the momentum grid p_l = hbar*l, in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n)


# --- state catalogue -------------------------------------------------------


@dataclass(frozen=True)
class PositionState:
    Q: float


@dataclass(frozen=True)
class MomentumState:
    P: float


@dataclass(frozen=True)
class Gaussian:
    Q: float
    P: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise StateError(f"Gaussian sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class CoherentPair:
    Q1: float
    Q2: float


@dataclass(frozen=True)
class IncoherentPair:
    Q1: float
    Q2: float


@dataclass(frozen=True)
class RandomState:
    pass


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise StateError(f"density matrix must be square, got shape {rho.shape}")
        if np.abs(rho - rho.conj().T).max() > 1e-10:
            raise StateError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > 1e-10:
            raise StateError(f"density matrix trace is {np.trace(rho).real:.12g}, expected 1")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise StateError("density matrix has negative eigenvalues")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    def __eq__(self, other):
        return isinstance(other, DensityMatrix) and np.array_equal(self.rho, other.rho)

    __hash__ = None


StateSpec = Union[
    PositionState, MomentumState, Gaussian, CoherentPair, IncoherentPair, RandomState, DensityMatrix
]

_TAGS = {
    PositionState: "position",
    MomentumState: "momentum",
    Gaussian: "gaussian",
    CoherentPair: "coherent_pair",
    IncoherentPair: "incoherent_pair",
    RandomState: "random",
    DensityMatrix: "density_matrix",
}
_ANGLES = {
    PositionState: ("Q",),
    MomentumState: ("P",),
    Gaussian: ("Q", "P", "sigma"),
    CoherentPair: ("Q1", "Q2"),
    IncoherentPair: ("Q1", "Q2"),
    RandomState: (),
}


def spec_to_json(spec) -> dict:
    """Serialize a state description; angles are emitted in units of pi."""
    cls = type(spec)
    if cls not in _TAGS:
        raise StateError(f"not a state description: {spec!r}")
    out = {"type": _TAGS[cls]}
    if cls is DensityMatrix:
        out["rho_re"] = spec.rho.real.tolist()
        out["rho_im"] = spec.rho.imag.tolist()
        return out
    for name in _ANGLES[cls]:
        out[name] = getattr(spec, name) / math.pi
    return out


def spec_from_json(obj: dict):
    """Inverse of :func:`spec_to_json`."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise StateError("state JSON must be an object with a 'type' field")
    by_tag = {tag: cls for cls, tag in _TAGS.items()}
    tag = obj["type"]
    if tag not in by_tag:
        raise StateError(f"unknown state type {tag!r}; expected one of {sorted(by_tag)}")
    cls = by_tag[tag]
    if cls is DensityMatrix:
        try:
            rho = np.asarray(obj["rho_re"], float) + 1j * np.asarray(obj.get("rho_im", 0.0), float)
        except (KeyError, TypeError, ValueError) as exc:
            raise StateError(f"bad density matrix payload: {exc}") from exc
        return DensityMatrix(rho)
    names = _ANGLES[cls]
    extra = set(obj) - set(names) - {"type"}
    if extra:
        raise StateError(f"unexpected fields for {tag}: {sorted(extra)}")
    try:
        kwargs = {name: float(obj[name]) * math.pi for name in names}
    except KeyError as exc:
        raise StateError(f"missing field {exc} for state type {tag!r}") from exc
    except (TypeError, ValueError) as exc:
        raise StateError(f"non-numeric field in {tag!r}: {exc}") from exc
    return cls(**kwargs)
