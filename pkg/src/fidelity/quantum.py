"""Exact quantum oracle: split-operator FFT propagation of the quantized map.

States live in the position basis on the grid q_j = 2*pi*j/n.  One period is
a free drift exp(-i p^2 / 2 hbar) applied in the momentum basis followed by
the kick exp(-i [W(q) + eps V(q)] / hbar) in the position basis.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import classical
from .series import FidelitySeries
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
)

WINDINGS = range(-3, 4)


@dataclass(frozen=True)
class MixedState:
    """Convex decomposition of a density matrix into pure components."""

    weights: tuple
    states: tuple

    def __post_init__(self):
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise StateError(f"mixture weights sum to {math.fsum(self.weights)!r}")

    def density_matrix(self) -> np.ndarray:
        return sum(w * np.outer(s, s.conj()) for w, s in zip(self.weights, self.states))


def snap_position(Q: float, params: MapParams) -> int:
    """Grid index of a position-state label; warns when Q is off-grid."""
    x = Q / params.dq
    j = int(round(x))
    if abs(x - j) > 1e-9:
        warnings.warn(f"position {Q:.6g} is off the grid; snapped to {j * params.dq:.6g}", stacklevel=3)
    return j % params.n


def snap_momentum(P: float, params: MapParams) -> int:
    """Integer momentum label l (p = hbar*l, symmetric range) of a momentum-state label."""
    x = P / params.hbar
    l = int(round(x))
    if abs(x - l) > 1e-9:
        warnings.warn(f"momentum {P:.6g} is off the grid; snapped to {l * params.hbar:.6g}", stacklevel=3)
    l %= params.n
    if l >= params.n - params.n // 2:
        l -= params.n
    return l


def basis_state(j: int, n: int) -> np.ndarray:
    psi = np.zeros(n, dtype=complex)
    psi[j] = 1.0
    return psi


def gaussian_amplitudes(Q: float, P: float, sigma: float, params: MapParams) -> np.ndarray:
    q = params.position_grid()
    psi = np.zeros(params.n, dtype=complex)
    for m in WINDINGS:
        x = q - Q + TWO_PI * m
        psi += np.exp(1j * P * x / params.hbar - x**2 / (2.0 * sigma**2))
    return psi / np.linalg.norm(psi)


def make_state(spec, params: MapParams):
    """Build the position-basis vector (pure) or a MixedState for ``spec``."""
    n = params.n
    if isinstance(spec, PositionState):
        return basis_state(snap_position(spec.Q, params), n)
    if isinstance(spec, MomentumState):
        l = snap_momentum(spec.P, params)
        return np.exp(1j * TWO_PI * l * np.arange(n) / n) / math.sqrt(n)
    if isinstance(spec, Gaussian):
        return gaussian_amplitudes(spec.Q, spec.P, spec.sigma, params)
    if isinstance(spec, (CoherentPair, IncoherentPair)):
        j1, j2 = snap_position(spec.Q1, params), snap_position(spec.Q2, params)
        if j1 == j2:
            raise StateError("pair components coincide on the position grid")
        if isinstance(spec, CoherentPair):
            return (basis_state(j1, n) + basis_state(j2, n)) / math.sqrt(2.0)
        return MixedState((0.5, 0.5), (basis_state(j1, n), basis_state(j2, n)))
    if isinstance(spec, RandomState):
        return MixedState((1.0 / n,) * n, tuple(basis_state(j, n) for j in range(n)))
    if isinstance(spec, DensityMatrix):
        if spec.rho.shape != (n, n):
            raise StateError(f"density matrix is {spec.rho.shape}, expected ({n}, {n})")
        vals, vecs = np.linalg.eigh(spec.rho)
        keep = vals > 1e-14
        w = vals[keep] / vals[keep].sum()
        return MixedState(tuple(w), tuple(vecs[:, i] for i in np.flatnonzero(keep)))
    raise StateError(f"unsupported state description {spec!r}")


class Propagator:
    """Precomputed split-operator phases for one parameter set."""

    def __init__(self, params: MapParams, use_perturbation: bool = False):
        self.params = params
        p = params.hbar * params.momentum_integers()
        self.drift = np.exp(-1j * p**2 / (2.0 * params.hbar))
        q = params.position_grid()
        pot = classical.kick_potential(q, params)
        if use_perturbation:
            pot = pot + params.epsilon * classical.perturbation(q)
        self.kick = np.exp(-1j * pot / params.hbar)

    def forward(self, psi: np.ndarray) -> np.ndarray:
        return self.kick * np.fft.ifft(self.drift * np.fft.fft(psi))

    def backward(self, psi: np.ndarray) -> np.ndarray:
        return np.fft.ifft(self.drift.conj() * np.fft.fft(self.kick.conj() * psi))


def evolve_step(psi, params: MapParams, use_perturbation: bool = False, direction: str = "forward"):
    prop = Propagator(params, use_perturbation)
    if direction == "forward":
        return prop.forward(psi)
    if direction == "backward":
        return prop.backward(psi)
    raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")


def dense_unitary(params: MapParams, use_perturbation: bool = False) -> np.ndarray:
    """One-period unitary as an explicit n x n matrix (brute force, no FFT)."""
    n = params.n
    j = np.arange(n)
    l = params.momentum_integers()
    phi = np.exp(2j * np.pi * np.outer(j, l) / n) / math.sqrt(n)
    drift = np.exp(-1j * (params.hbar * l) ** 2 / (2.0 * params.hbar))
    q = params.position_grid()
    pot = classical.kick_potential(q, params)
    if use_perturbation:
        pot = pot + params.epsilon * classical.perturbation(q)
    return np.diag(np.exp(-1j * pot / params.hbar)) @ phi @ np.diag(drift) @ phi.conj().T


def pure_amplitude(psi: np.ndarray, t_max: int, params: MapParams) -> np.ndarray:
    """<psi_eps(t)|psi_0(t)> for t = 0..t_max."""
    free = Propagator(params, False)
    pert = Propagator(params, True)
    a, b = psi.copy(), psi.copy()
    out = np.empty(t_max + 1, dtype=complex)
    out[0] = np.vdot(b, a)
    for t in range(1, t_max + 1):
        a = free.forward(a)
        b = pert.forward(b)
        out[t] = np.vdot(b, a)
    return out


def exact_fidelity(spec, t_max: int, params: MapParams, workers: int = 1) -> FidelitySeries:
    """Exact fidelity amplitude O(t) = sum_i w_i <psi_i^eps(t)|psi_i^0(t)>."""
    if t_max < 0:
        raise ValueError(f"t_max must be >= 0, got {t_max}")
    state = make_state(spec, params)
    if isinstance(state, MixedState):
        run = lambda s: pure_amplitude(s, t_max, params)  # noqa: E731
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                parts = list(pool.map(run, state.states))
        else:
            parts = [run(s) for s in state.states]
        amp = np.zeros(t_max + 1, dtype=complex)
        for w, part in zip(state.weights, parts):
            amp = amp + w * part
        n_comp = len(state.states)
    else:
        amp = pure_amplitude(state, t_max, params)
        n_comp = 1
    amp[0] = 1.0
    return FidelitySeries.exact(amp, n_comp)
