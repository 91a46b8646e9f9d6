"""Classical standard-map dynamics and the accumulated action difference.

All functions accept scalar or array coordinates; arrays propagate a whole
ensemble in lockstep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .states import MapParams, TorusPoint, wrap


def kick_potential(q, params: MapParams):
    """Unperturbed kick potential W(q) = -k cos q."""
    return -params.k * np.cos(q)


def kick_force(q, params: MapParams):
    """W'(q) = k sin q."""
    return params.k * np.sin(q)


def perturbation(q):
    """Perturbation shape V(q) = -cos 2q."""
    return -np.cos(2.0 * q)


def perturbation_force(q):
    """V'(q) = 2 sin 2q."""
    return 2.0 * np.sin(2.0 * q)


def map_step(point: TorusPoint, params: MapParams, use_perturbation: bool = False) -> TorusPoint:
    q, p = point
    q1 = wrap(q + p)
    force = kick_force(q1, params)
    if use_perturbation:
        force = force + params.epsilon * perturbation_force(q1)
    return TorusPoint(q1, wrap(p - force))


def inverse_map_step(point: TorusPoint, params: MapParams, use_perturbation: bool = False) -> TorusPoint:
    q1, p1 = point
    force = kick_force(q1, params)
    if use_perturbation:
        force = force + params.epsilon * perturbation_force(q1)
    p = wrap(p1 + force)
    return TorusPoint(wrap(q1 - p), p)


@dataclass(frozen=True)
class TrajectoryRecord:
    initial: TorusPoint
    current: TorusPoint
    steps_taken: int
    delta_S: float


def action_history(start: TorusPoint, t_max: int, params: MapParams):
    """Propagate with the unperturbed map and return (endpoint, delta_S per step).

    ``delta_S[..., j]`` is the action difference after j kicks,
    -epsilon * sum of V at the post-drift positions q_1..q_j.  The trailing
    axis has length t_max + 1 and starts at zero.
    """
    if t_max < 0:
        raise ValueError(f"t_max must be >= 0, got {t_max}")
    q = np.asarray(start[0], dtype=float)
    p = np.asarray(start[1], dtype=float)
    vsum = np.zeros((t_max + 1,) + q.shape)
    for j in range(1, t_max + 1):
        q = wrap(q + p)
        vsum[j] = vsum[j - 1] + perturbation(q)
        p = wrap(p - kick_force(q, params))
    delta_S = -params.epsilon * np.moveaxis(vsum, 0, -1)
    return TorusPoint(q, p), delta_S


def propagate_with_action(start: TorusPoint, t: int, params: MapParams) -> TrajectoryRecord:
    end, delta_S = action_history(start, t, params)
    if np.ndim(end.q) == 0:
        end = TorusPoint(float(end.q), float(end.p))
        dS = float(delta_S[-1])
    else:
        dS = delta_S[..., -1]
    return TrajectoryRecord(initial=TorusPoint(*start), current=end, steps_taken=t, delta_S=dS)


def echo_endpoint(start: TorusPoint, t: int, params: MapParams) -> TorusPoint:
    """t unperturbed forward steps followed by t perturbed inverse steps."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    point = TorusPoint(*start)
    for _ in range(t):
        point = map_step(point, params)
    for _ in range(t):
        point = inverse_map_step(point, params, use_perturbation=True)
    return point


def torus_distance(a, b):
    """Shortest signed separation on the circle, elementwise."""
    d = np.mod(np.asarray(a) - np.asarray(b) + np.pi, 2 * np.pi) - np.pi
    return np.abs(d)
