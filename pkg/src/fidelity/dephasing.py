"""Monte Carlo dephasing representation of the fidelity amplitude.

O(t) is estimated as the Wigner-weighted average of exp(-i dS_t / hbar) over
unperturbed trajectories, where dS_t is the perturbation action accumulated
along each trajectory.  Each trajectory is propagated once to t_max and its
action recorded at every kick, so one ensemble serves the whole curve.

Estimates are self-normalized: the weighted phase sum is divided by the sum
of the weights.  Every sampler is unbiased for a unit-normalized Wigner
function, so this only removes the sampling noise of the normalization, and
at zero perturbation the result is exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classical import action_history
from .phase_space import sample_wigner
from .series import FidelitySeries, map_blocks, series_from_samples
from .states import (
    TWO_PI,
    CoherentPair,
    Gaussian,
    IncoherentPair,
    MapParams,
    MomentumState,
    PositionState,
    RandomState,
    StateError,
    wrap,
)


@dataclass(frozen=True)
class EstimatorConfig:
    n_trajectories: int = 1000
    seed: int = 0
    t_max: int = 50
    interference: bool = True
    # draw the free momentum (or position) of delta states from the discrete
    # grid instead of the continuous circle
    momentum_grid: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.n_trajectories < 1:
            raise ValueError(f"n_trajectories must be >= 1, got {self.n_trajectories}")
        if self.t_max < 0:
            raise ValueError(f"t_max must be >= 0, got {self.t_max}")


def _free_angle(rng, size, params: MapParams, config: EstimatorConfig, spacing: float):
    if config.momentum_grid:
        return wrap(spacing * rng.integers(0, params.n, size))
    return TWO_PI * rng.random(size)


def _estimate(draw, config: EstimatorConfig, params: MapParams, tag: str) -> FidelitySeries:
    """Run ``draw(rng, size) -> (q, p, coeff)`` blockwise; arrays are (size, components)."""
    hbar = params.hbar

    def block(rng, size):
        q, p, coeff = draw(rng, size)
        _, dS = action_history((q, p), config.t_max, params)
        phase = np.exp(-1j * dS / hbar)
        num = np.zeros((size, config.t_max + 1), dtype=complex)
        den = np.zeros(size)
        for c in range(coeff.shape[1]):
            num = num + coeff[:, c, None] * phase[:, c, :]
            den = den + coeff[:, c] * 1.0
        return num, den

    parts = map_blocks(block, config.seed, config.n_trajectories, config.workers)
    num = np.concatenate([part[0] for part in parts])
    den = np.concatenate([part[1] for part in parts])
    return series_from_samples(num, den, tag)


def _column(x):
    return np.asarray(x, dtype=float).reshape(-1, 1)


def _wigner_draw(spec, params: MapParams, config: EstimatorConfig):
    def draw(rng, size):
        if isinstance(spec, PositionState) and config.momentum_grid:
            q = np.full(size, wrap(spec.Q))
            p = _free_angle(rng, size, params, config, params.hbar)
            coeff = np.ones(size)
        elif isinstance(spec, MomentumState) and config.momentum_grid:
            q = _free_angle(rng, size, params, config, params.dq)
            p = np.full(size, wrap(spec.P))
            coeff = np.ones(size)
        else:
            batch = sample_wigner(spec, params, rng, size)
            q, p, coeff = batch.q, batch.p, batch.coefficient
        return _column(q), _column(p), _column(coeff)

    return draw


def _pair_draw(Q1: float, Q2: float, interference: bool, params: MapParams, config: EstimatorConfig):
    if wrap(Q1) == wrap(Q2):
        raise StateError("pair components coincide")
    cols = [wrap(Q1), wrap(Q2)]
    if interference:
        cols.append(wrap(0.5 * (Q1 + Q2)))
    q_cols = np.array(cols)

    def draw(rng, size):
        # common momenta for all terms
        p = _free_angle(rng, size, params, config, params.hbar)
        q = np.broadcast_to(q_cols, (size, len(cols))).copy()
        pp = np.repeat(p[:, None], len(cols), axis=1)
        coeff = np.empty((size, len(cols)))
        coeff[:, 0] = 0.5
        coeff[:, 1] = 0.5
        if interference:
            coeff[:, 2] = np.cos((Q1 - Q2) * p / params.hbar)
        return q, pp, coeff

    return draw


def dr_fidelity(spec, config: EstimatorConfig, params: MapParams) -> FidelitySeries:
    """Dephasing-representation fidelity for any supported initial state."""
    if isinstance(spec, CoherentPair):
        return dr_coherent_pair(spec.Q1, spec.Q2, config, params)
    if isinstance(spec, IncoherentPair):
        return dr_incoherent_pair(spec.Q1, spec.Q2, config, params)
    return _estimate(_wigner_draw(spec, params, config), config, params, "dr_general")


def dr_position_form(Q: float, config: EstimatorConfig, params: MapParams) -> FidelitySeries:
    """Position state: fixed q = Q, uniformly distributed initial momentum."""
    return dr_fidelity(PositionState(Q), config, params)


def dr_gaussian_pos_localized(Q, P, sigma, config: EstimatorConfig, params: MapParams) -> FidelitySeries:
    """Gaussian packet treated as localized in position: q pinned at Q."""
    Gaussian(Q, P, sigma)  # validates sigma
    p_std = params.hbar / (sigma * math.sqrt(2.0))

    def draw(rng, size):
        p = wrap(P + p_std * rng.standard_normal(size))
        return _column(np.full(size, wrap(Q))), _column(p), _column(np.ones(size))

    return _estimate(draw, config, params, "dr_pos_form")


def dr_gaussian_mom_localized(Q, P, sigma, config: EstimatorConfig, params: MapParams) -> FidelitySeries:
    """Gaussian packet treated as localized in momentum: p pinned at P."""
    Gaussian(Q, P, sigma)
    q_std = sigma / math.sqrt(2.0)

    def draw(rng, size):
        q = wrap(Q + q_std * rng.standard_normal(size))
        return _column(q), _column(np.full(size, wrap(P))), _column(np.ones(size))

    return _estimate(draw, config, params, "dr_mom_form")


def dr_coherent_pair(Q1, Q2, config: EstimatorConfig, params: MapParams) -> FidelitySeries:
    """(|Q1> + |Q2>)/sqrt 2 with the midpoint interference column.

    With ``config.interference`` off the interference term is dropped, which
    is the estimator for the incoherent mixture of the two position states.
    """
    draw = _pair_draw(Q1, Q2, config.interference, params, config)
    return _estimate(draw, config, params, "dr_general" if config.interference else "dr_no_interference")


def dr_incoherent_pair(Q1, Q2, config: EstimatorConfig, params: MapParams) -> FidelitySeries:
    draw = _pair_draw(Q1, Q2, False, params, config)
    return _estimate(draw, config, params, "dr_no_interference")


def dr_random_state(config: EstimatorConfig, params: MapParams) -> FidelitySeries:
    return dr_fidelity(RandomState(), config, params)


def interference_amplitude(Q1, Q2, config: EstimatorConfig, params: MapParams) -> FidelitySeries:
    """Mean of cos((Q1-Q2) p / hbar) * exp(-i dS_t(midpoint, p) / hbar) alone (not normalized)."""
    mid = wrap(0.5 * (Q1 + Q2))

    def draw(rng, size):
        p = _free_angle(rng, size, params, config, params.hbar)
        c = np.cos((Q1 - Q2) * p / params.hbar)
        return _column(np.full(size, mid)), _column(p), _column(c)

    hbar = params.hbar

    def block(rng, size):
        q, p, coeff = draw(rng, size)
        _, dS = action_history((q, p), config.t_max, params)
        return coeff[:, 0, None] * np.exp(-1j * dS[:, 0, :] / hbar)

    num = np.concatenate(map_blocks(block, config.seed, config.n_trajectories, config.workers))
    return series_from_samples(num, np.ones(num.shape[0]), "interference")
