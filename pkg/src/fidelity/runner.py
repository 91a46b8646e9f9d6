"""Experiment configuration, figure presets and CSV/JSON output."""

from __future__ import annotations

import copy
import csv
import io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .comparison import diagonal_report, potential_correlator, wigner_overlap_fidelity
from .dephasing import (
    EstimatorConfig,
    dr_coherent_pair,
    dr_fidelity,
    dr_gaussian_mom_localized,
    dr_gaussian_pos_localized,
)
from .quantum import exact_fidelity
from .series import METHODS, FidelitySeries
from .states import (
    CoherentPair,
    Gaussian,
    IncoherentPair,
    MapParams,
    RandomState,
    StateError,
    spec_from_json,
)

CSV_HEADER = ("t", "method", "M", "O_re", "O_im", "std_err", "n_samples", "seed")
DIAGNOSTICS_HEADER = ("lag", "C_W", "C_V")
SEED_ENV = "FIDELITY_SEED"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def fmt(x) -> str:
    """17 significant digits: round-trip exact for doubles."""
    return format(float(x), ".17g")


@dataclass
class ExperimentConfig:
    params: dict
    state: dict
    methods: list
    t_max: int = 50
    n_trajectories: int = 1000
    seed: int = 0
    workers: int = 1
    output_path: str = "fidelity.csv"
    momentum_grid: bool = False

    def __post_init__(self):
        self.validate()

    @property
    def map_params(self) -> MapParams:
        p = self.params
        return MapParams(p["n"], p["k"], p.get("epsilon", 0.0), p.get("hbar"))

    @property
    def spec(self):
        return spec_from_json(self.state)

    def estimator(self, interference: bool = True) -> EstimatorConfig:
        return EstimatorConfig(
            n_trajectories=self.n_trajectories,
            seed=self.seed,
            t_max=self.t_max,
            interference=interference,
            momentum_grid=self.momentum_grid,
            workers=self.workers,
        )

    def validate(self):
        if not isinstance(self.params, dict) or not {"n", "k"} <= set(self.params):
            raise ConfigError("params must be an object with at least 'n' and 'k'")
        unknown = set(self.params) - {"n", "k", "epsilon", "hbar"}
        if unknown:
            raise ConfigError(f"unknown params fields: {sorted(unknown)}")
        try:
            params = self.map_params
            spec = self.spec
        except (StateError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if not self.methods:
            raise ConfigError("at least one method is required")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; expected one of {list(METHODS)}")
            allowed = _METHOD_STATES.get(m)
            if allowed and not isinstance(spec, allowed):
                raise ConfigError(f"method {m!r} does not apply to state type {self.state['type']!r}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("duplicate methods")
        for name in ("t_max", "n_trajectories", "seed", "workers"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if self.t_max < 0 or self.n_trajectories < 1 or self.workers < 1:
            raise ConfigError("need t_max >= 0, n_trajectories >= 1 and workers >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if "density_matrix" == self.state.get("type") and spec.rho.shape[0] != params.n:
            raise ConfigError("density matrix dimension does not match params.n")

    def to_json(self) -> dict:
        return {
            "params": dict(self.params),
            "state": copy.deepcopy(self.state),
            "methods": list(self.methods),
            "t_max": self.t_max,
            "n_trajectories": self.n_trajectories,
            "seed": self.seed,
            "workers": self.workers,
            "output_path": self.output_path,
            "momentum_grid": self.momentum_grid,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        known = {"params", "state", "methods", "t_max", "n_trajectories", "seed", "workers", "output_path", "momentum_grid"}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        for required in ("params", "state", "methods"):
            if required not in obj:
                raise ConfigError(f"config is missing {required!r}")
        return cls(**copy.deepcopy(obj))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_json(obj)


_METHOD_STATES = {
    "dr_pos_form": (Gaussian,),
    "dr_mom_form": (Gaussian,),
    "dr_no_interference": (CoherentPair, IncoherentPair),
    "wigner_overlap": (Gaussian, RandomState),
}


# --- presets ------------------------------------------------------------------

_FIG1 = {"n": 1000, "k": 0.95, "epsilon": 0.015}
_FIG2 = {"n": 200, "k": 0.7, "epsilon": 0.02}
_FIG4 = {"n": 100, "k": 2.0, "epsilon": 0.03}
_GAUSS_METHODS = ["exact", "dr_general", "dr_pos_form", "dr_mom_form"]
_PAIR_METHODS = ["exact", "dr_general", "dr_no_interference"]

PRESETS = {
    "fig1a": (_FIG1, {"type": "gaussian", "Q": 0.7, "P": 0.4, "sigma": 0.004}, _GAUSS_METHODS, 1000),
    "fig1b": (_FIG1, {"type": "gaussian", "Q": 0.7, "P": 0.4, "sigma": 0.16}, _GAUSS_METHODS, 1000),
    "fig1c": (_FIG1, {"type": "gaussian", "Q": 0.7, "P": 0.4, "sigma": 0.04}, _GAUSS_METHODS, 1000),
    "fig2a": (_FIG2, {"type": "coherent_pair", "Q1": 0.4, "Q2": 1.2}, _PAIR_METHODS, 400),
    "fig2b": (_FIG2, {"type": "coherent_pair", "Q1": 0.4, "Q2": 0.42}, _PAIR_METHODS, 400),
    "fig3": (_FIG2, {"type": "incoherent_pair", "Q1": 0.4, "Q2": 0.42}, ["exact", "dr_general"], 200),
    "fig4": (_FIG4, {"type": "random"}, ["exact", "dr_general"], 1000),
}

_PARAM_KEYS = {"n", "k", "epsilon", "hbar"}
_STATE_KEYS = {"Q", "P", "sigma", "Q1", "Q2"}
_ALIASES = {"N": "n_trajectories", "trajectories": "n_trajectories", "out": "output_path", "eps": "epsilon"}


def preset_config(name: str, overrides: dict | None = None) -> ExperimentConfig:
    """Resolve a figure preset and apply ``overrides`` (flat key -> value)."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}")
    params, state, methods, n_traj = PRESETS[name]
    obj = {
        "params": dict(params),
        "state": dict(state),
        "methods": list(methods),
        "n_trajectories": n_traj,
        "output_path": f"{name}.csv",
    }
    for key, value in (overrides or {}).items():
        key = _ALIASES.get(key, key)
        if key in _PARAM_KEYS:
            obj["params"][key] = value
        elif key in _STATE_KEYS:
            obj["state"][key] = value
        elif key == "methods" and isinstance(value, str):
            obj["methods"] = [m for m in value.split(",") if m]
        else:
            obj[key] = value
    return ExperimentConfig.from_json(obj)


def parse_override(token: str):
    """'key=value' -> (key, value) with JSON-ish value parsing."""
    if "=" not in token:
        raise ConfigError(f"override {token!r} is not of the form key=value")
    key, raw = token.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


# --- execution ----------------------------------------------------------------


def compute_series(config: ExperimentConfig) -> dict:
    params = config.map_params
    spec = config.spec
    out = {}
    for method in config.methods:
        if method == "exact":
            s = exact_fidelity(spec, config.t_max, params, workers=config.workers)
        elif method == "dr_general":
            s = dr_fidelity(spec, config.estimator(interference=True), params)
        elif method == "dr_no_interference":
            s = dr_coherent_pair(spec.Q1, spec.Q2, config.estimator(interference=False), params)
        elif method == "dr_pos_form":
            s = dr_gaussian_pos_localized(spec.Q, spec.P, spec.sigma, config.estimator(), params)
        elif method == "dr_mom_form":
            s = dr_gaussian_mom_localized(spec.Q, spec.P, spec.sigma, config.estimator(), params)
        else:
            s = wigner_overlap_fidelity(spec, config.estimator(), params)
        out[method] = s.retag(method)
    return out


def series_csv(series: dict, seed: int, t_max: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for t in range(t_max + 1):
        for method, s in series.items():
            O = s.amplitude[t]
            writer.writerow(
                [t, method, fmt(s.fidelity[t]), fmt(O.real), fmt(O.imag), fmt(s.std_error[t]), s.n_samples, seed]
            )
    return buf.getvalue()


def sidecar_path(output_path) -> Path:
    path = Path(output_path)
    return path.with_suffix(".json") if path.suffix != ".json" else path.with_name(path.name + ".meta.json")


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def run_experiment(config: ExperimentConfig) -> dict:
    """Compute every configured method, write the CSV and its JSON sidecar."""
    series = compute_series(config)
    out = Path(config.output_path)
    _write(out, series_csv(series, config.seed, config.t_max))
    meta = {"version": __version__, "config": config.to_json()}
    _write(sidecar_path(out), json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return series


def run_preset(name: str, overrides: dict | None = None) -> dict:
    return run_experiment(preset_config(name, overrides))


def apply_seed_env(config: ExperimentConfig) -> ExperimentConfig:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return config
    try:
        seed = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc
    obj = config.to_json()
    obj["seed"] = seed
    return ExperimentConfig.from_json(obj)


def diagnostics(
    params: MapParams,
    t_max_lag: int,
    n_samples: int = 10000,
    seed: int = 0,
    output_path: str = "diagnostics.csv",
    workers: int = 1,
) -> dict:
    """Write lag,C_W,C_V rows and a JSON summary of diffusion coefficients."""
    cw = potential_correlator("W", t_max_lag, n_samples, seed, params, workers=workers)
    cv = potential_correlator("V", t_max_lag, n_samples, seed, params, workers=workers)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(DIAGNOSTICS_HEADER)
    for lag in range(t_max_lag + 1):
        writer.writerow([lag, fmt(cw.values[lag]), fmt(cv.values[lag])])
    out = Path(output_path)
    _write(out, buf.getvalue())
    summary = diagonal_report(params, cw, cv)
    summary.update(
        {
            "C_W0_std_error": float(cw.std_error[0]),
            "C_V0_std_error": float(cv.std_error[0]),
            "n": params.n,
            "k": params.k,
            "t_max_lag": t_max_lag,
            "n_samples": n_samples,
            "seed": seed,
            "version": __version__,
        }
    )
    _write(sidecar_path(out), json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return {"C_W": cw, "C_V": cv, "summary": summary}
