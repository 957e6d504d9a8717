import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from redlight.distributions import ExponentialGreen, UniformGreen
from redlight.euler_lagrange import (
    ELCurve,
    asymptote,
    el_distance,
    el_duration,
    el_ode_residual,
    el_slope,
    el_translation_check,
    el_velocity,
    v_beta,
)
from redlight.kinematics import ProblemSpec

EXP = ExponentialGreen(0.1)
A_FIG = 260.0
# mpmath quadrature of the EL velocity between the crossing times
EL_DIST_TO_8694 = 1623.563861686879407051
EL_DIST_TO_REST = 1812.476378862910316111
EL_TIME_TO_REST = 14.66337068793427044658


def ref(alpha=6.0, beta=20.0, v_max=200.0, dist=EXP):
    return ProblemSpec(alpha, beta, v_max, 0.0, 1000.0, 10_000.0, dist)


class TestCurves:
    def test_initial_condition(self):
        v0 = 137.0
        curve = ELCurve.exponential(200.0 - v0 + 6.0 / 0.1, 6.0, 200.0, 0.1)
        assert el_velocity(curve, 0.0) == pytest.approx(v0, rel=1e-15)

    def test_uniform_zero_offset_starts_at_limit(self):
        curve = ELCurve(UniformGreen(10.0), 0.0, 6.0, 200.0)
        assert el_velocity(curve, 0.0) == 200.0

    def test_asymptote_minus_coefficient(self):
        assert asymptote(6.0, 200.0, 0.1) == pytest.approx(A_FIG)
        assert el_velocity(ELCurve.exponential(200.0, 6.0, 200.0, 0.1), 0.0) == pytest.approx(60.0)

    def test_coefficient_offset_round_trip(self):
        curve = ELCurve.exponential(37.5, 6.0, 200.0, 0.1)
        assert curve.B == pytest.approx(0.1 * 37.5 - 6.0)
        assert curve.b == pytest.approx(37.5)

    def test_through_point(self):
        curve = ELCurve.through(EXP, 6.0, 200.0, 3.0, 150.0)
        assert el_velocity(curve, 3.0) == pytest.approx(150.0, rel=1e-14)

    def test_slope_formula(self):
        curve = ELCurve.exponential(45.0, 6.0, 200.0, 0.1)
        t = np.linspace(0.0, 10.0, 11)
        v = el_velocity(curve, t)
        np.testing.assert_allclose(el_slope(curve, t), -0.1 * (A_FIG - v), rtol=1e-13)

    def test_uniform_slope_is_minus_alpha(self):
        curve = ELCurve(UniformGreen(10.0), 0.3, 6.0, 200.0)
        np.testing.assert_allclose(el_slope(curve, np.linspace(0.0, 9.0, 10)), -6.0)


class TestResidual:
    def test_exponential_family(self):
        rng = np.random.default_rng(0)
        for b in rng.uniform(1.0, 200.0, 20):
            curve = ELCurve.exponential(float(b), 6.0, 200.0, 0.1)
            t = rng.uniform(0.0, 30.0, 50)
            assert np.max(np.abs(el_ode_residual(curve, EXP, t))) <= 1e-9

    def test_scaled_coefficient_stays_a_solution(self):
        curve = ELCurve.exponential(60.0 * 1.01, 6.0, 200.0, 0.1)
        t = np.linspace(0.0, 20.0, 41)
        assert np.max(np.abs(el_ode_residual(curve, EXP, t))) <= 1e-9

    def test_uniform_exact(self):
        dist = UniformGreen(12.0)
        curve = ELCurve(dist, -0.4, 6.0, 200.0)
        t = np.linspace(0.0, 11.9, 50)
        assert np.max(np.abs(el_ode_residual(curve, dist, t))) <= 1e-12


class TestBrakingSpeed:
    def test_reference_parameters(self):
        assert v_beta(ref()) == 60.0

    def test_symmetric_bounds(self):
        assert v_beta(ref(alpha=7.0, beta=7.0)) == pytest.approx(200.0)

    def test_regime_boundary(self):
        assert v_beta(ref(alpha=6.0, beta=6.0 + 0.1 * 200.0)) == pytest.approx(0.0, abs=1e-12)

    def test_el_slope_hits_minus_beta(self):
        p = ref()
        vb = v_beta(p)
        assert -0.1 * (A_FIG - vb) == pytest.approx(-p.beta)

    def test_requires_exponential(self):
        with pytest.raises(TypeError):
            v_beta(ref(dist=UniformGreen(10.0)))


class TestDistance:
    def test_empty_arc(self):
        assert el_distance(120.0, 120.0, 0.1, A_FIG) == 0.0
        assert el_duration(120.0, 120.0, 0.1, A_FIG) == 0.0

    def test_spec_example(self):
        assert el_distance(200.0, 86.94, 0.1, A_FIG) == pytest.approx(EL_DIST_TO_8694, rel=1e-13)

    def test_down_to_rest(self):
        assert el_distance(200.0, 0.0, 0.1, A_FIG) == pytest.approx(EL_DIST_TO_REST, rel=1e-13)
        assert el_duration(200.0, 0.0, 0.1, A_FIG) == pytest.approx(EL_TIME_TO_REST, rel=1e-13)

    def test_matches_quadrature(self):
        curve = ELCurve.exponential(A_FIG - 180.0, 6.0, 200.0, 0.1)
        t_end = el_duration(180.0, 40.0, 0.1, A_FIG)
        num, _ = quad(lambda t: float(el_velocity(curve, t)), 0.0, t_end, epsabs=1e-12)
        assert abs(el_distance(180.0, 40.0, 0.1, A_FIG) - num) <= 1e-8

    def test_rejects_speed_above_asymptote(self):
        with pytest.raises(ValueError):
            el_distance(A_FIG, 10.0, 0.1, A_FIG)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(0.0, 200.0), b=st.floats(0.0, 200.0), c=st.floats(0.0, 200.0))
def test_distance_additive(a, b, c):
    hi, mid, lo = sorted((a, b, c), reverse=True)
    whole = el_distance(hi, lo, 0.1, A_FIG)
    parts = el_distance(hi, mid, 0.1, A_FIG) + el_distance(mid, lo, 0.1, A_FIG)
    assert abs(whole - parts) <= 1e-10 * max(1.0, whole)


class TestTranslation:
    t = np.linspace(0.0, 15.0, 61)

    def test_same_curve(self):
        c = ELCurve.exponential(30.0, 6.0, 200.0, 0.1)
        shift, dev = el_translation_check(EXP, c.B, c.B, self.t, 6.0, 200.0)
        assert shift == 0.0 and dev == 0.0

    def test_unit_shift_exponential(self):
        b1 = 30.0
        c1 = ELCurve.exponential(b1, 6.0, 200.0, 0.1)
        c2 = ELCurve.exponential(math.exp(0.1) * b1, 6.0, 200.0, 0.1)
        shift, dev = el_translation_check(EXP, c1.B, c2.B, self.t, 6.0, 200.0)
        assert shift == pytest.approx(1.0, rel=1e-12)
        assert dev <= 1e-9

    def test_unit_shift_uniform(self):
        q = 20.0
        shift, dev = el_translation_check(UniformGreen(q), 0.2, 0.2 + 6.0 / q, self.t, 6.0, 200.0)
        assert shift == pytest.approx(1.0, rel=1e-14)
        assert dev <= 1e-12
