"""Wigner functions of the supported initial states: evaluation, discrete
transform and signed importance sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

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
    wrap,
)

PHASE_SPACE_VOLUME = TWO_PI**2
WINDINGS = range(-3, 4)


class DeltaStateError(StateError):
    """Raised when a delta-supported Wigner function is evaluated pointwise."""


@dataclass(frozen=True)
class SignedSample:
    point: TorusPoint
    sign: float
    importance_weight: float
    component: int = 0


@dataclass(frozen=True)
class SampleBatch:
    q: np.ndarray
    p: np.ndarray
    sign: np.ndarray
    weight: np.ndarray
    component: np.ndarray

    @property
    def coefficient(self) -> np.ndarray:
        return self.sign * self.weight

    def __len__(self):
        return len(self.q)

    def __getitem__(self, i) -> SignedSample:
        return SignedSample(
            TorusPoint(float(self.q[i]), float(self.p[i])),
            float(self.sign[i]),
            float(self.weight[i]),
            int(self.component[i]),
        )


# --- discrete Wigner transform ----------------------------------------------


def cell_volume(params: MapParams) -> float:
    return (math.pi / params.n) ** 2


def wigner_kernel(rho: np.ndarray) -> np.ndarray:
    """Complex discrete Wigner weights on the 2n x 2n half-integer lattice.

    Sums to tr(rho).  The imaginary part vanishes for Hermitian input.
    """
    rho = np.asarray(rho, dtype=complex)
    n = rho.shape[0]
    a = np.arange(2 * n)
    m = np.arange(n)
    # f[a, m] = rho[m, (a - m) mod n]
    f = rho[m[None, :], (a[:, None] - m[None, :]) % n]
    F = np.fft.fft(f, axis=1)
    raw = np.exp(1j * np.pi * np.outer(a, a) / n) * F[:, a % n] / (2 * n)
    # average over 2x2 blocks to move onto the half-integer lattice
    return 0.25 * (raw + np.roll(raw, 1, axis=0) + np.roll(raw, 1, axis=1) + np.roll(raw, (1, 1), axis=(0, 1)))


def discrete_wigner(rho: np.ndarray, params: MapParams | None = None) -> np.ndarray:
    """Wigner density of an n x n density matrix on the 2n x 2n half-integer lattice.

    Entry [a, b] is the density on the cell q in [(a-1), a) * pi/n,
    p in [(b-1), b) * pi/n.  Position state x occupies columns 2x and 2x+1,
    momentum label l rows 2l and 2l+1 (l mod n).  The grid is real, sums to
    1 / cell_volume and reproduces both basis-probability marginals.
    """
    rho = np.asarray(rho, dtype=complex)
    n = rho.shape[0]
    if rho.ndim != 2 or rho.shape != (n, n):
        raise StateError(f"density matrix must be square, got shape {rho.shape}")
    if params is not None and params.n != n:
        raise StateError(f"density matrix is {n}x{n} but params.n = {params.n}")
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise StateError("density matrix is not Hermitian")
    return wigner_kernel(rho).real / ((math.pi / n) ** 2)


def discrete_marginals(grid: np.ndarray):
    """Position and momentum (FFT-ordered) probabilities from a discrete Wigner grid."""
    n = grid.shape[0] // 2
    vol = (math.pi / n) ** 2
    cols = grid.sum(axis=1) * vol
    rows = grid.sum(axis=0) * vol
    return cols[0::2] + cols[1::2], rows[0::2] + rows[1::2]


def lattice_index(x, n: int):
    """Half-integer lattice cell index of an angle."""
    return (np.floor(wrap(x) * n / math.pi).astype(int) + 1) % (2 * n)


def density_of(spec, params: MapParams) -> np.ndarray:
    """Density matrix for any state description (used for discrete Wigner grids)."""
    from .quantum import MixedState, make_state

    if isinstance(spec, DensityMatrix):
        return spec.rho
    state = make_state(spec, params)
    if isinstance(state, MixedState):
        return state.density_matrix()
    return np.outer(state, state.conj())


_grid_cache: dict = {}


def _cached(spec, params: MapParams):
    """(grid, cumulative |mass|) for a state, cached per state and parameters."""
    key = (("density", id(spec)) if isinstance(spec, DensityMatrix) else spec, params)
    hit = _grid_cache.get(key)
    if hit is None or (isinstance(spec, DensityMatrix) and hit[0] is not spec):
        if len(_grid_cache) > 16:
            _grid_cache.clear()
        grid = discrete_wigner(density_of(spec, params), params)
        cdf = np.cumsum(np.abs(grid).ravel()) * cell_volume(params)
        hit = (spec, grid, cdf)
        _grid_cache[key] = hit
    return hit[1], hit[2]


def _grid_for(spec, params: MapParams) -> np.ndarray:
    return _cached(spec, params)[0]


# --- pointwise evaluation -----------------------------------------------------


def periodic_gaussian(x, center: float, width: float):
    """sum_m exp(-(x - center + 2 pi m)^2 / width^2)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for m in WINDINGS:
        out = out + np.exp(-((x - center + TWO_PI * m) ** 2) / width**2)
    return out


def wigner_eval(spec, point: TorusPoint, params: MapParams):
    """Wigner function rho_W(q, p) of ``spec``; accepts scalar or array points."""
    q, p = point
    if isinstance(spec, (PositionState, MomentumState)):
        raise DeltaStateError(
            "delta-distribution not pointwise evaluable; use sample_wigner for position/momentum states"
        )
    if isinstance(spec, Gaussian):
        hb = params.hbar
        val = periodic_gaussian(q, spec.Q, spec.sigma) * periodic_gaussian(p, spec.P, hb / spec.sigma)
        val = val / (math.pi * hb)
    elif isinstance(spec, RandomState):
        val = np.full(np.broadcast(np.asarray(q), np.asarray(p)).shape, 1.0 / PHASE_SPACE_VOLUME)
    elif isinstance(spec, (CoherentPair, IncoherentPair, DensityMatrix)):
        grid = _grid_for(spec, params)
        val = grid[lattice_index(q, params.n), lattice_index(p, params.n)]
    else:
        raise StateError(f"unsupported state description {spec!r}")
    if np.ndim(val) == 0:
        return float(val)
    return val


def purity(spec, params: MapParams) -> float:
    """(2 pi hbar) * integral of rho_W^2 for states with a known closed form."""
    if isinstance(spec, Gaussian):
        return 1.0
    if isinstance(spec, RandomState):
        return params.hbar / TWO_PI
    raise StateError(f"no closed-form purity for {spec!r}")


# --- sampling -----------------------------------------------------------------


def sample_wigner(spec, params: MapParams, rng: np.random.Generator, size: int | None = None):
    """Draw signed, importance-weighted samples of the Wigner function.

    E[sign * weight * f(q, p)] equals the phase-space integral of rho_W * f.
    With ``size=None`` a single :class:`SignedSample` is returned, otherwise
    a :class:`SampleBatch` of that many draws.
    """
    m = 1 if size is None else int(size)
    ones = np.ones(m)
    comp = np.zeros(m, dtype=int)
    if isinstance(spec, PositionState):
        q, p = np.full(m, wrap(spec.Q)), TWO_PI * rng.random(m)
        sign, weight = ones, ones.copy()
    elif isinstance(spec, MomentumState):
        q, p = TWO_PI * rng.random(m), np.full(m, wrap(spec.P))
        sign, weight = ones, ones.copy()
    elif isinstance(spec, Gaussian):
        q = wrap(spec.Q + spec.sigma / math.sqrt(2.0) * rng.standard_normal(m))
        p = wrap(spec.P + params.hbar / (spec.sigma * math.sqrt(2.0)) * rng.standard_normal(m))
        sign, weight = ones, ones.copy()
    elif isinstance(spec, RandomState):
        q, p = TWO_PI * rng.random(m), TWO_PI * rng.random(m)
        sign, weight = ones, ones.copy()
    elif isinstance(spec, IncoherentPair):
        comp = rng.integers(0, 2, m)
        q = np.where(comp == 0, wrap(spec.Q1), wrap(spec.Q2))
        p = TWO_PI * rng.random(m)
        sign, weight = ones, ones.copy()
    elif isinstance(spec, CoherentPair):
        # proposal: columns Q1, Q2, midpoint with probabilities 1/4, 1/4, 1/2
        u = rng.random(m)
        comp = np.where(u < 0.25, 0, np.where(u < 0.5, 1, 2))
        q = np.choose(comp, [wrap(spec.Q1), wrap(spec.Q2), wrap(0.5 * (spec.Q1 + spec.Q2))])
        p = TWO_PI * rng.random(m)
        c = np.cos((spec.Q1 - spec.Q2) * p / params.hbar)
        sign = np.where(comp == 2, np.sign(c), 1.0)
        weight = np.where(comp == 2, 2.0 * np.abs(c), 2.0)
    elif isinstance(spec, DensityMatrix):
        grid, cdf = _cached(spec, params)
        total = cdf[-1]
        if not total > np.finfo(float).tiny * cdf.size:
            raise StateError("degenerate Wigner distribution: every cell vanishes")
        cells = np.minimum(np.searchsorted(cdf, total * rng.random(m), side="right"), cdf.size - 1)
        a, b = np.divmod(cells, grid.shape[1])
        h = math.pi / params.n
        q = wrap((a - 1 + rng.random(m)) * h)
        p = wrap((b - 1 + rng.random(m)) * h)
        sign = np.sign(grid.ravel()[cells])
        weight = np.full(m, total)
    else:
        raise StateError(f"unsupported state description {spec!r}")
    batch = SampleBatch(np.asarray(q, float), np.asarray(p, float), np.asarray(sign, float), weight, comp)
    return batch[0] if size is None else batch
