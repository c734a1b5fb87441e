import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridleg.model import (
    ComplianceSplit,
    ConfigurationError,
    LegGeometry,
    Trajectory,
    biological_delay,
    hip_height,
    knee_angle_for_height,
    rotational_from_linear,
    split_stiffness,
)


def test_biological_delay_quoted_values():
    assert biological_delay(2.0) == pytest.approx(0.035, abs=0.001)
    assert biological_delay(0.6) == pytest.approx(0.027, abs=0.001)
    assert biological_delay(1.0) == 0.031


@pytest.mark.parametrize("mass", [0.0, -1.0])
def test_biological_delay_rejects_nonpositive_mass(mass):
    with pytest.raises(ValueError):
        biological_delay(mass)


@given(st.floats(0.01, 1e3), st.floats(1.001, 10.0))
def test_biological_delay_increasing(m, factor):
    assert biological_delay(m * factor) > biological_delay(m)


def test_split_examples():
    assert split_stiffness(ComplianceSplit(1.6717, 1.0)) == (1.6717, 0.0)
    assert split_stiffness(ComplianceSplit(3.0, 0.0)) == (0.0, 3.0)
    kp, ka = split_stiffness(ComplianceSplit(1.6717, 0.5))
    assert kp == pytest.approx(0.83585) and ka == pytest.approx(0.83585)
    assert kp + ka == pytest.approx(1.6717, rel=1e-15)


@settings(max_examples=1000)
@given(st.floats(1e-3, 1e4), st.floats(0.0, 1.0))
def test_split_sums_to_total(k, lam):
    kp, ka = split_stiffness(ComplianceSplit(k, lam))
    assert abs((kp + ka) - k) <= math.ulp(k)
    assert kp == lam * k


@pytest.mark.parametrize("k, lam", [(0.0, 0.5), (-1.0, 0.5), (1.0, -0.1), (1.0, 1.1)])
def test_split_invariants(k, lam):
    with pytest.raises(ConfigurationError):
        ComplianceSplit(k, lam)


def test_rotational_from_linear():
    assert rotational_from_linear(4680, 0.0189) == pytest.approx(1.6717, abs=5e-4)
    assert rotational_from_linear(123.0, 1.0) == 123.0
    assert rotational_from_linear(1000, 0.05) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        rotational_from_linear(0, 0.1)
    with pytest.raises(ValueError):
        rotational_from_linear(100, -0.1)


@given(st.floats(1.0, 1e4), st.floats(1e-3, 1.0))
def test_rotational_quadratic_in_radius(k, r):
    assert rotational_from_linear(k, 2 * r) == pytest.approx(4 * rotational_from_linear(k, r))


def test_hip_height_examples():
    g = LegGeometry(segment_length=0.16)
    assert hip_height(g, 1e-9) == pytest.approx(0.32)
    assert hip_height(g, math.pi / 2) == pytest.approx(0.32 * math.cos(math.pi / 4))
    assert hip_height(g, math.pi / 2) == pytest.approx(0.2263, abs=1e-4)
    assert hip_height(g, 2 * math.acos(0.9)) == pytest.approx(0.288)


@pytest.mark.parametrize("theta", [0.0, -0.1, math.pi, 4.0])
def test_hip_height_domain(theta):
    with pytest.raises(ValueError):
        hip_height(LegGeometry(), theta)


def test_hip_height_strictly_decreasing():
    th = np.linspace(1e-6, math.pi - 1e-6, 2001)
    assert np.all(np.diff(hip_height(LegGeometry(), th)) < 0)


@given(st.floats(0.01, 3.1))
def test_knee_angle_inverts_hip_height(theta):
    g = LegGeometry()
    assert knee_angle_for_height(g, hip_height(g, theta)) == pytest.approx(theta, abs=1e-7)


def test_geometry_invariants():
    with pytest.raises(ConfigurationError):
        LegGeometry(hip_constraint_gain=0.6)
    with pytest.raises(ConfigurationError):
        LegGeometry(segment_length=0.0)


def test_trajectory_defaults():
    tr = Trajectory([0.0, 0.1], [0.4, 0.3])
    assert tr.touchdown_time == 0.0 and tr.drop_height == 0.4
    assert np.all(tr.contact == 0) and np.all(np.isnan(tr.theta))
    with pytest.raises(ValueError):
        Trajectory([0.0, 1.0], [1.0])
