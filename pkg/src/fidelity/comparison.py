"""Rival estimators and diagnostics: Wigner-overlap fidelity and potential
correlators with their diffusion coefficients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import inverse_map_step, kick_potential, map_step, perturbation
from .dephasing import EstimatorConfig
from .phase_space import purity, sample_wigner, wigner_eval
from .series import FidelitySeries, map_blocks, ratio_estimate
from .states import TWO_PI, Gaussian, MapParams, RandomState, StateError, TorusPoint


def wigner_overlap_fidelity(spec, config: EstimatorConfig, params: MapParams) -> FidelitySeries:
    """Overlap of the initial Wigner function with its classically echo-evolved image.

    The echo runs t unperturbed steps forward and t perturbed steps back.
    The overlap integral is estimated as purity * sum rho_W(x_t) / sum rho_W(x_0)
    over samples x_0 ~ rho_W; the denominator is the Monte Carlo estimate of
    the known purity and cancels its sampling noise.  ``amplitude`` holds
    sqrt(M), since this method produces no phase.
    """
    if not isinstance(spec, (Gaussian, RandomState)):
        raise StateError(f"signed Wigner overlap not supported for {type(spec).__name__}")
    T = config.t_max

    def block(rng, size):
        batch = sample_wigner(spec, params, rng, size)
        x0 = TorusPoint(batch.q, batch.p)
        start = wigner_eval(spec, x0, params)
        vals = np.empty((size, T + 1))
        vals[:, 0] = start
        forward = x0
        for t in range(1, T + 1):
            forward = map_step(forward, params)
            point = forward
            for _ in range(t):
                point = inverse_map_step(point, params, use_perturbation=True)
            vals[:, t] = wigner_eval(spec, point, params)
        return vals, np.asarray(start, float)

    parts = map_blocks(block, config.seed, config.n_trajectories, config.workers)
    num = np.concatenate([part[0] for part in parts])
    den = np.concatenate([part[1] for part in parts])
    ratio, var, _, _ = ratio_estimate(num, den)
    P = purity(spec, params)
    M = P * ratio.real
    return FidelitySeries(
        times=np.arange(T + 1),
        amplitude=np.sqrt(np.maximum(M, 0.0)).astype(complex),
        fidelity=M,
        std_error=P * np.sqrt(var),
        n_samples=num.shape[0],
        method_tag="wigner_overlap",
        amplitude_std_error=None,
    )


@dataclass
class CorrelatorSeries:
    lags: np.ndarray
    values: np.ndarray
    std_error: np.ndarray
    diffusion_sum: float
    asymptotic_mean: float


def _observable(which: str, params: MapParams):
    if which == "W":
        return lambda q: kick_potential(q, params)
    if which == "V":
        return perturbation
    raise ValueError(f"which must be 'W' or 'V', got {which!r}")


def potential_correlator(
    which: str,
    t_max_lag: int,
    n_samples: int,
    seed: int,
    params: MapParams,
    direction: str = "forward",
    workers: int = 1,
) -> CorrelatorSeries:
    """C(t) = <X(q_t) X(q_0)> for mean-centered X over the uniform torus measure.

    Trajectories follow the unperturbed map; ``direction="backward"`` pairs
    q_0 with its preimages instead, which must agree for a stationary measure.
    """
    if t_max_lag < 0:
        raise ValueError(f"t_max_lag must be >= 0, got {t_max_lag}")
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    f = _observable(which, params)
    step = map_step if direction == "forward" else inverse_map_step

    def block(rng, size):
        point = TorusPoint(TWO_PI * rng.random(size), TWO_PI * rng.random(size))
        x = np.empty((size, t_max_lag + 1))
        x[:, 0] = f(point.q)
        for t in range(1, t_max_lag + 1):
            point = step(point, params)
            x[:, t] = f(point.q)
        return x

    x = np.concatenate(map_blocks(block, seed, n_samples, workers))
    x = x - x.mean()
    prod = x * x[:, :1]
    values = prod.mean(axis=0)
    err = prod.std(axis=0, ddof=1) / np.sqrt(n_samples) if n_samples > 1 else np.zeros(t_max_lag + 1)
    # discrete Green-Kubo sum: <(sum of t samples)^2> ~ 2 K t
    diffusion = 0.5 * values[0] + values[1:].sum()
    if t_max_lag == 0:
        asymptotic = float(values[0])
    else:
        asymptotic = float((values.sum() - 0.5 * (values[0] + values[-1])) / t_max_lag)
    return CorrelatorSeries(np.arange(t_max_lag + 1), values, err, float(diffusion), asymptotic)


def diagonal_report(params: MapParams, cw: CorrelatorSeries, cv: CorrelatorSeries) -> dict:
    """Diffusion coefficients and the exponents governing off-diagonal suppression.

    ``chaotic_rate`` is (K_W - K_V eps^2) / hbar^2, to be compared with the
    topological entropy; ``integrable_rate`` is (C_W^inf - C_V^inf eps^2) / (2 hbar^2).
    """
    eps2 = params.epsilon**2
    hb2 = params.hbar**2
    return {
        "K_W": cw.diffusion_sum,
        "K_V": cv.diffusion_sum,
        "C_W_inf": cw.asymptotic_mean,
        "C_V_inf": cv.asymptotic_mean,
        "hbar": params.hbar,
        "epsilon": params.epsilon,
        "chaotic_rate": (cw.diffusion_sum - cv.diffusion_sum * eps2) / hb2,
        "integrable_rate": (cw.asymptotic_mean - cv.asymptotic_mean * eps2) / (2.0 * hb2),
        "epsilon_sq_threshold_integrable": cw.asymptotic_mean / cv.asymptotic_mean
        if cv.asymptotic_mean != 0
        else float("nan"),
    }
