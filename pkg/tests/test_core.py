import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from twopulse import (FieldState, InvalidParameterError, MediumPrep, Occupancy, PulseSpec,
                      PulseTruncationWarning, SimulationGrid, initial_density,
                      make_doppler_quadrature, sample_input_pulse)
from twopulse.core import density_violations, pulse_envelope


def test_pure_state_preparation():
    rho = initial_density(MediumPrep(1.0, 0.0))
    assert np.array_equal(rho, np.diag([1, 0, 0]).astype(complex))


def test_mixed_state_preparation():
    rho = initial_density(MediumPrep(0.8, 0.2))
    assert np.allclose(rho, np.diag([0.8, 0.2, 0.0]))


@pytest.mark.parametrize("a2,b2", [(1.2, 0.0), (0.5, 0.4), (-0.1, 1.1)])
def test_populations_must_sum_to_one(a2, b2):
    with pytest.raises(InvalidParameterError):
        MediumPrep(a2, b2)


def test_bad_line_and_coupling_rejected():
    with pytest.raises(InvalidParameterError):
        MediumPrep(1, 0, 10, t2_star=0.0)
    with pytest.raises(InvalidParameterError):
        MediumPrep(1, 0, 10, mu=-1.0)


def test_occupancy_mask():
    occ = Occupancy(0.0, 2.0)
    assert occ(-0.1) == 0.0 and occ(0.0) == 1.0 and occ(1.9) == 1.0 and occ(2.0) == 0.0
    with pytest.raises(InvalidParameterError):
        Occupancy(1.0, 1.0)


def test_sharp_line_has_one_node():
    q = make_doppler_quadrature(10.0)
    assert q.nodes.tolist() == [10.0] and q.weights.tolist() == [1.0]
    with pytest.raises(InvalidParameterError):
        make_doppler_quadrature(10.0, math.inf, 4)


def test_doppler_weights_normalized():
    q = make_doppler_quadrature(10.0, 0.3)
    assert len(q.nodes) == 32
    assert abs(q.weights.sum() - 1) < 1e-14
    assert abs(q.average(q.nodes) - 10.0) < 1e-12
    assert abs(q.average((q.nodes - 10) ** 2) - (1 / 0.3) ** 2) < 1e-10


def test_lorentzian_average_matches_adaptive_quadrature():
    # oracle: adaptive integration of the Gaussian-weighted Lorentzian
    t2, d0 = 1.0, 10.0
    s = 1 / t2
    f = lambda d: math.exp(-0.5 * ((d - d0) / s) ** 2) / (s * math.sqrt(2 * math.pi)) / (d * d + 1)
    want = quad(f, -np.inf, np.inf, epsabs=0, epsrel=1e-13, limit=500)[0]
    q = make_doppler_quadrature(d0, t2, 32)
    got = float(np.dot(q.weights, 1 / (q.nodes ** 2 + 1)))
    assert abs(got / want - 1) < 1e-8


def test_gaussian_peak_follows_area_normalization():
    t = np.linspace(-10, 10, 20001)
    env = sample_input_pulse(PulseSpec("pump_a", "gaussian", 1.3 * math.pi), t)
    assert abs(np.abs(env).max() - 1.3 * math.pi / math.sqrt(2 * math.pi)) < 1e-12
    # 1.3pi/sqrt(2pi) = 1.629; the quoted 3.258 is the peak of a tau/2-wide gaussian
    assert abs(np.abs(env).max() - 1.6290) < 1e-3


def test_zero_area_is_all_zero():
    t = np.linspace(-10, 10, 101)
    assert not np.any(sample_input_pulse(PulseSpec("pump_a", "sech", 0.0), t))


@settings(max_examples=50, deadline=None)
@given(area=st.floats(1e-6, 20), shape=st.sampled_from(["sech", "gaussian"]))
def test_area_is_linear(area, shape):
    t = np.linspace(-10, 10, 401)
    a1 = abs(np.trapezoid(sample_input_pulse(PulseSpec("pump_a", shape, area), t), t))
    a2 = abs(np.trapezoid(sample_input_pulse(PulseSpec("pump_a", shape, 2 * area), t), t))
    assert abs(a2 / a1 - 2) < 1e-12


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 128), t2=st.floats(0.05, 10))
def test_quadrature_weights_positive_and_normalized(n, t2):
    q = make_doppler_quadrature(10.0, t2, n)
    assert np.all(q.weights > 0) and abs(q.weights.sum() - 1) < 1e-12


@pytest.mark.parametrize("shape", ["gaussian", "sech"])
@pytest.mark.parametrize("area", [0.005 * math.pi, math.pi, 4 * math.pi])
def test_sampled_area(shape, area):
    t = np.linspace(-40, 40, 16001)
    env = sample_input_pulse(PulseSpec("pump_a", shape, area, 1.5, 2.0, 0.7), t)
    assert abs(abs(np.trapezoid(env, t)) - area) < 1e-9 * max(area, 1)
    assert abs(np.angle(env[np.argmax(np.abs(env))]) - 0.7) < 1e-12


def test_sech_peak_is_two_over_tau_for_2pi():
    assert abs(pulse_envelope("sech", 2 * math.pi, 1.0, 0.0) - 2.0) < 1e-15


def test_truncated_axis_warns():
    t = np.linspace(-2, 10, 101)
    with pytest.warns(PulseTruncationWarning):
        sample_input_pulse(PulseSpec("pump_a", "gaussian", 1.0), t)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sample_input_pulse(PulseSpec("pump_a", "gaussian", 1.0), np.linspace(-10, 10, 101))


def test_pulse_spec_validation():
    with pytest.raises(InvalidParameterError):
        PulseSpec("pump_c")
    with pytest.raises(InvalidParameterError):
        PulseSpec("pump_a", "square")
    with pytest.raises(InvalidParameterError):
        PulseSpec("pump_a", "sech", 1.0, width=0.0)


def test_grid_axes():
    g = SimulationGrid(-1, 1, 21, 0, 2, 4)
    assert g.t_axis.size == 21 and abs(g.dt - 0.1) < 1e-15
    assert g.z_axis.size == 5 and abs(g.dz - 0.5) < 1e-15
    with pytest.raises(InvalidParameterError):
        SimulationGrid(1, -1, 21)


def test_field_state_shapes():
    with pytest.raises(InvalidParameterError):
        FieldState(np.zeros(3), np.zeros(4), 0.0)


@settings(max_examples=50, deadline=None)
@given(a2=st.floats(0, 1))
def test_preparation_is_a_density_matrix(a2):
    assert density_violations(initial_density(MediumPrep(a2, 1 - a2))) == []
