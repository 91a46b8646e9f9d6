import math

import numpy as np
import pytest

from conftest import PI, random_density
from fidelity import (
    CoherentPair,
    DensityMatrix,
    Gaussian,
    IncoherentPair,
    MapParams,
    MomentumState,
    PositionState,
    RandomState,
)
from fidelity.dephasing import (
    EstimatorConfig,
    dr_coherent_pair,
    dr_fidelity,
    dr_gaussian_mom_localized,
    dr_gaussian_pos_localized,
    dr_incoherent_pair,
    dr_position_form,
    dr_random_state,
    interference_amplitude,
)


def combined_se(a, b):
    return np.mean(np.sqrt(a.std_error**2 + b.std_error**2))


SPECS = [
    PositionState(0.4 * PI),
    MomentumState(0.4 * PI),
    Gaussian(0.7 * PI, 0.4 * PI, 0.04 * PI),
    RandomState(),
    CoherentPair(0.4 * PI, 1.2 * PI),
    IncoherentPair(0.4 * PI, 0.42 * PI),
    DensityMatrix(random_density(np.random.default_rng(3), 50, rank=3)),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: type(s).__name__)
def test_zero_perturbation_is_exactly_one(spec):
    params = MapParams(50, 0.95, 0.0)
    s = dr_fidelity(spec, EstimatorConfig(300, seed=1, t_max=20), params)
    assert np.array_equal(s.fidelity, np.ones(21))
    assert np.array_equal(s.amplitude, np.ones(21, complex))


def test_zero_perturbation_specialized_forms():
    params = MapParams(1000, 0.95, 0.0)
    cfg = EstimatorConfig(200, t_max=15)
    for fn in (dr_gaussian_pos_localized, dr_gaussian_mom_localized):
        assert np.array_equal(fn(0.7 * PI, 0.4 * PI, 0.04 * PI, cfg, params).fidelity, np.ones(16))
    assert np.array_equal(dr_position_form(1.0, cfg, params).fidelity, np.ones(16))
    assert np.array_equal(dr_incoherent_pair(1.0, 2.0, cfg, params).fidelity, np.ones(16))
    assert np.array_equal(dr_coherent_pair(1.0, 2.0, cfg, params).fidelity, np.ones(16))


def test_grid_momentum_pair_zero_perturbation():
    cfg = EstimatorConfig(400, t_max=10, momentum_grid=True)
    s = dr_coherent_pair(0.4 * PI, 0.42 * PI, cfg, MapParams(200, 0.7, 0.0))
    assert np.array_equal(s.fidelity, np.ones(11))


@pytest.mark.parametrize("spec", [Gaussian(0.7 * PI, 0.4 * PI, 0.16 * PI), CoherentPair(0.4 * PI, 0.42 * PI)])
def test_workers_bit_identical(spec):
    params = MapParams(200, 0.7, 0.02)
    one = dr_fidelity(spec, EstimatorConfig(1000, seed=5, t_max=20, workers=1), params)
    four = dr_fidelity(spec, EstimatorConfig(1000, seed=5, t_max=20, workers=4), params)
    assert np.array_equal(one.amplitude, four.amplitude)
    assert np.array_equal(one.std_error, four.std_error)


def test_seed_changes_result():
    params = MapParams(200, 0.7, 0.02)
    a = dr_random_state(EstimatorConfig(300, seed=1, t_max=10), params)
    b = dr_random_state(EstimatorConfig(300, seed=2, t_max=10), params)
    assert not np.array_equal(a.amplitude, b.amplitude)


def test_position_form_matches_general():
    params = MapParams(200, 0.7, 0.02)
    cfg = EstimatorConfig(500, seed=3, t_max=20)
    a = dr_position_form(0.4 * PI, cfg, params)
    b = dr_fidelity(PositionState(0.4 * PI), cfg, params)
    assert np.array_equal(a.amplitude, b.amplitude)


def test_incoherent_equals_pair_without_interference():
    params = MapParams(200, 0.7, 0.02)
    cfg = EstimatorConfig(400, seed=3, t_max=20)
    inc = dr_incoherent_pair(0.4 * PI, 0.42 * PI, cfg, params)
    off = dr_coherent_pair(0.4 * PI, 0.42 * PI, EstimatorConfig(400, seed=3, t_max=20, interference=False), params)
    assert np.array_equal(inc.amplitude, off.amplitude)
    assert off.method_tag == "dr_no_interference"
    assert dr_coherent_pair(0.4 * PI, 0.42 * PI, cfg, params).method_tag == "dr_general"
    assert dr_fidelity(IncoherentPair(0.4 * PI, 0.42 * PI), cfg, params).method_tag == "dr_no_interference"


def test_interference_amplitude_first_step():
    # at t=0 the term is just the mean of cos((Q1-Q2)p/hbar) over uniform p, about 0
    params = MapParams(200, 0.7, 0.02)
    s = interference_amplitude(0.4 * PI, 1.2 * PI, EstimatorConfig(20000, t_max=5), params)
    assert abs(s.amplitude[0]) < 4 * s.amplitude_std_error[0]


@pytest.mark.parametrize("spec", [Gaussian(0.7 * PI, 0.4 * PI, 0.16 * PI), RandomState(), PositionState(1.0)])
def test_amplitude_bounded(spec):
    params = MapParams(200, 0.95, 0.03)
    s = dr_fidelity(spec, EstimatorConfig(500, seed=0, t_max=30), params)
    assert np.all(np.abs(s.amplitude) <= 1 + 3 * s.amplitude_std_error + 1e-12)
    assert np.all(s.fidelity >= 0)


def test_standard_error_scaling():
    params = MapParams(200, 0.95, 0.02)
    Ns = np.array([500, 2000, 8000])
    se = []
    for N in Ns:
        s = dr_fidelity(Gaussian(0.7 * PI, 0.4 * PI, 0.16 * PI), EstimatorConfig(int(N), seed=11, t_max=20), params)
        se.append(s.amplitude_std_error[5:].mean())
    slope = np.polyfit(np.log(Ns), np.log(se), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.1)


@pytest.mark.parametrize(
    "sigma, form",
    [(0.004 * PI, dr_gaussian_pos_localized), (0.16 * PI, dr_gaussian_mom_localized)],
)
def test_specialized_form_consistent_in_its_regime(sigma, form):
    params = MapParams(1000, 0.95, 0.015)
    cfg = EstimatorConfig(2000, seed=4, t_max=50)
    general = dr_fidelity(Gaussian(0.7 * PI, 0.4 * PI, sigma), cfg, params)
    special = form(0.7 * PI, 0.4 * PI, sigma, cfg, params)
    assert np.mean(np.abs(general.fidelity - special.fidelity)) <= 2 * combined_se(general, special)


def test_sample_count_and_times():
    s = dr_fidelity(RandomState(), EstimatorConfig(321, t_max=7), MapParams(20, 1.0, 0.01))
    assert s.n_samples == 321
    assert np.array_equal(s.times, np.arange(8))
    assert s.fidelity[0] == 1.0
    assert math.isclose(abs(s.amplitude[0]), 1.0)
