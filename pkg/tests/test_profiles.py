import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from warpdirac import (ConfigurationError, Family, HypothesisViolationError,
                       MetricProfile, UnsupportedFamilyError, check_A2,
                       eval_phi, profile_constants)

FLAT = MetricProfile(Family.FLAT)
SINH = MetricProfile(Family.SINH)
AF001 = MetricProfile(Family.ASYMPTOTICALLY_FLAT, epsilon=0.01, alpha=1, beta=1)
POLY3 = MetricProfile(Family.POLYNOMIAL, degree=3)

# frozen via an independent sympy-derivative + golden-section oracle
AF001_A_PHI = 0.010886621079
AF001_B_PHI = 0.019818434518
AF0001_A_PHI = 0.001088662108
AF0001_B_PHI = 0.001972913368


def test_flat_is_identity():
    r = np.linspace(0.0, 50.0, 101)
    phi, dphi, d2phi = eval_phi(FLAT, r)
    assert np.array_equal(phi, r)
    assert np.all(dphi == 1.0)
    assert np.all(d2phi == 0.0)


def test_sinh_values():
    phi, dphi, d2phi = eval_phi(SINH, 1.0)
    assert phi == pytest.approx(math.sinh(1.0), abs=1e-15)
    assert dphi == pytest.approx(math.cosh(1.0), abs=1e-15)
    assert d2phi == pytest.approx(math.sinh(1.0), abs=1e-15)


def test_af_value_at_one():
    phi, _, _ = eval_phi(AF001, 1.0)
    assert phi == pytest.approx(1.0 + 0.01 / math.sqrt(2.0), rel=1e-14)


def test_origin_limits():
    for prof in (FLAT, SINH, AF001, POLY3):
        phi, dphi, _ = eval_phi(prof, 0.0)
        assert phi == 0.0
        assert dphi == 1.0


def test_positive_away_from_origin():
    # direct sinh evaluation overflows past r ~ 710; scans use scaled ratios
    r = np.geomspace(1e-6, 500.0, 400)
    for prof in (FLAT, SINH, AF001, POLY3):
        phi, _, _ = eval_phi(prof, r)
        assert np.all(phi > 0.0)


def test_negative_radius_rejected():
    with pytest.raises(ConfigurationError):
        eval_phi(FLAT, -1.0)


def test_invalid_parameters():
    with pytest.raises(ConfigurationError):
        MetricProfile(Family.ASYMPTOTICALLY_FLAT, epsilon=-0.1)
    with pytest.raises(ConfigurationError):
        MetricProfile(Family.ASYMPTOTICALLY_FLAT, alpha=3, beta=2)
    with pytest.raises(ConfigurationError):
        MetricProfile(Family.POLYNOMIAL, degree=1)
    with pytest.raises(ConfigurationError):
        MetricProfile(Family.FLAT, n=2)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["flat", "sinh", "af", "af_high", "poly"]),
       st.floats(min_value=1e-3, max_value=50.0))
def test_derivatives_match_finite_differences(tag, r):
    prof = {
        "flat": FLAT, "sinh": SINH, "af": AF001, "poly": POLY3,
        "af_high": MetricProfile(Family.ASYMPTOTICALLY_FLAT, epsilon=0.05,
                                 alpha=2, beta=3),
    }[tag]
    h = 1e-5
    phi, dphi, d2phi = eval_phi(prof, r)
    pm, _, _ = eval_phi(prof, max(r - h, 0.0))
    pp, _, _ = eval_phi(prof, r + h)
    fd1 = (pp - pm) / (2.0 * h)
    fd2 = (pp - 2.0 * phi + pm) / h**2
    scale1 = max(abs(dphi), 1.0)
    # second differences at h = 1e-5 carry roundoff ~ phi * eps / h^2
    scale2 = max(abs(d2phi), abs(phi), 1.0)
    assert abs(fd1 - dphi) / scale1 < 1e-6
    assert abs(fd2 - d2phi) / scale2 < 1e-4


def test_profile_constants_flat_zero():
    c = profile_constants(FLAT)
    assert c.a_phi == 0.0 and c.b_phi == 0.0 and c.c_phi == 0.0


def test_profile_constants_zero_amplitude():
    prof = MetricProfile(Family.ASYMPTOTICALLY_FLAT, epsilon=0.0)
    c = profile_constants(prof)
    assert c.a_phi == 0.0 and c.b_phi == 0.0


def test_profile_constants_frozen_values():
    c = profile_constants(AF001)
    assert c.a_phi == pytest.approx(AF001_A_PHI, abs=1e-9)
    assert c.b_phi == pytest.approx(AF001_B_PHI, abs=1e-9)
    assert 0.0 < c.a_phi < 0.05
    assert 0.0 < c.b_phi < 0.05
    # c_phi = sup |phi1'/(1+phi1)| is attained at r = 0 for alpha = beta = 1
    assert c.c_phi == pytest.approx(0.01, abs=1e-10)
    small = profile_constants(MetricProfile(Family.ASYMPTOTICALLY_FLAT, epsilon=0.001))
    assert small.a_phi == pytest.approx(AF0001_A_PHI, abs=1e-9)
    assert small.b_phi == pytest.approx(AF0001_B_PHI, abs=1e-9)


def test_profile_constants_monotone_in_amplitude():
    scales = [0.001, 0.005, 0.02, 0.08, 0.3]
    a_vals, b_vals = [], []
    for eps in scales:
        c = profile_constants(MetricProfile(Family.ASYMPTOTICALLY_FLAT, epsilon=eps))
        a_vals.append(c.a_phi)
        b_vals.append(c.b_phi)
    assert all(x < y for x, y in zip(a_vals, a_vals[1:]))
    assert all(x < y for x, y in zip(b_vals, b_vals[1:]))


def test_profile_constants_unsupported_families():
    for prof in (SINH, POLY3):
        with pytest.raises(UnsupportedFamilyError):
            profile_constants(prof)


def test_check_A2_flat_passes():
    verdict = check_A2(FLAT, 1.0)
    assert verdict.passed
    assert verdict.threshold == pytest.approx(0.125)
    assert verdict.achieved == 0.0


def test_check_A2_sinh_unsupported():
    with pytest.raises(UnsupportedFamilyError):
        check_A2(SINH, 1.0)


def test_check_A2_large_amplitude_fails():
    # eps = 0.2 gives max(A, B) ~ 0.435 > 1/8 (independent oracle)
    prof = MetricProfile(Family.ASYMPTOTICALLY_FLAT, epsilon=0.2)
    verdict = check_A2(prof, 1.0)
    assert not verdict.passed
    assert verdict.threshold == pytest.approx(min(0.25, 0.125))
    assert verdict.achieved > 0.125


def test_check_A2_threshold_cases():
    assert check_A2(AF001, 2.0).threshold == 1.0
    assert check_A2(AF001, 0.75).threshold == pytest.approx(0.25 + 0.75**2 - 0.75)


def test_check_A2_hypothesis_gate():
    with pytest.raises(HypothesisViolationError):
        check_A2(AF001, 0.5)
