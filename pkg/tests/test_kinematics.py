import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from redlight.distributions import ExponentialGreen, UniformGreen
from redlight.kinematics import (
    ADMISSIBLE_ORDERS,
    BOXED_ORDERS,
    PhasePattern,
    ProblemSpec,
    Segment,
    Trajectory,
    build_trajectory,
    check_lipschitz,
    full_speed_distance,
    position_at,
    validate_problem,
    velocity_at,
)

EXP = ExponentialGreen(0.1)


def ref(v0=200.0, d=4000.0, L=4000.0, dist=EXP):
    return ProblemSpec(6.0, 20.0, 200.0, v0, d, L, dist)


class TestProblemSpec:
    @pytest.mark.parametrize("field", ["alpha", "beta", "v_max", "d", "L"])
    def test_rejects_non_positive(self, field):
        kw = dict(alpha=6.0, beta=20.0, v_max=200.0, v0=0.0, d=10.0, L=4000.0, dist=EXP)
        kw[field] = 0.0
        with pytest.raises(ValueError, match=field):
            ProblemSpec(**kw)

    def test_rejects_speed_above_limit(self):
        with pytest.raises(ValueError, match="v0"):
            ref(v0=200.5)

    def test_with_start_keeps_physics(self):
        p = ref().with_start(50.0, 1234.0)
        assert (p.alpha, p.beta, p.v_max, p.L, p.v0, p.d) == (6.0, 20.0, 200.0, 4000.0, 50.0, 1234.0)


class TestValidateProblem:
    def test_just_short_of_stopping_distance(self):
        rep = validate_problem(ref(v0=200.0, d=999.0))
        assert not rep.feasible
        assert "stopping-infeasible" in rep.reasons

    def test_exact_stopping_distance_is_feasible(self):
        assert validate_problem(ref(v0=200.0, d=1000.0)).ok

    def test_from_rest(self):
        rep = validate_problem(ref(v0=0.0, d=1000.0))
        assert rep.feasible and not rep.trivial

    def test_light_unreachable_before_short_horizon(self):
        q, v0, alpha = 2.0, 10.0, 6.0
        # q <= (v_max - v0)/alpha, so the car is still accelerating at q
        d = q * (v0 + q * alpha / 2)
        rep = validate_problem(ProblemSpec(alpha, 20.0, 200.0, v0, d, 4000.0, UniformGreen(q)))
        assert rep.trivial and rep.feasible
        assert rep.reasons == ["light-unreachable"]

    def test_full_speed_distance_two_phases(self):
        assert full_speed_distance(6.0, 30.0, 0.0, 10.0) == pytest.approx(900 / 12 + 30 * 5)

    def test_destination_checks(self):
        rep = validate_problem(ref(v0=0.0, d=1000.0, L=3000.0))
        assert "destination-too-close" in rep.reasons
        rep = validate_problem(ref(v0=0.0, d=3500.0, L=3400.0))
        assert "destination-before-light" in rep.reasons

    def test_weak_brakes_rejected_for_bounded_law(self):
        p = ProblemSpec(6.0, 5.0, 30.0, 10.0, 100.0, 400.0, UniformGreen(20.0))
        assert "braking-weaker-than-acceleration" in validate_problem(p).reasons
        assert validate_problem(ProblemSpec(6.0, 5.0, 30.0, 10.0, 100.0, 400.0, EXP)).ok


class TestVelocityPosition:
    def test_alpha_from_rest(self):
        traj = build_trajectory(ref(v0=0.0, d=1000.0), [("alpha", 5.0)])
        assert velocity_at(traj, 1.0) == pytest.approx(6.0)
        assert position_at(traj, 2.0) == pytest.approx(12.0)

    def test_beta_to_rest(self):
        traj = build_trajectory(ref(v0=200.0, d=1000.0), [("beta", None), ("zero", math.inf)])
        assert velocity_at(traj, 10.0) == 0.0
        assert position_at(traj, 10.0) == pytest.approx(1000.0)
        assert position_at(traj, 1e6) == pytest.approx(1000.0)

    def test_exponential_el_closed_form(self):
        p = ref(v0=150.0, d=4000.0)
        traj = build_trajectory(p, [("el", 5.0)])
        t = np.linspace(0.0, 5.0, 11)
        expected = 200 + 6 / 0.1 - (200 - 150 + 6 / 0.1) * np.exp(0.1 * t)
        np.testing.assert_allclose(traj.velocity(t), expected, rtol=1e-14)

    def test_position_at_origin(self):
        traj = build_trajectory(ref(v0=150.0), [("el", 5.0)])
        assert position_at(traj, 0.0) == 0.0

    def test_terminal_hold_extends_velocity(self):
        traj = build_trajectory(ref(v0=200.0), [("vmax", 3.0)])
        assert velocity_at(traj, 10.0) == 200.0
        assert position_at(traj, 10.0) == pytest.approx(2000.0)

    def test_vectorized_matches_scalar(self):
        traj = build_trajectory(ref(v0=100.0), [("alpha", 5.0), ("el", 4.0), ("beta", None), ("zero", math.inf)])
        t = np.linspace(0.0, 30.0, 31)
        np.testing.assert_array_equal(traj.velocity(t), [velocity_at(traj, float(s)) for s in t])


class TestLipschitz:
    def test_alpha_only(self):
        assert check_lipschitz(build_trajectory(ref(v0=0.0), [("alpha", 10.0)])) == 0.0

    def test_beta_only(self):
        traj = build_trajectory(ref(v0=200.0, d=1000.0), [("beta", None), ("zero", math.inf)])
        assert check_lipschitz(traj) == 0.0

    def test_el_past_braking_speed_violates(self):
        # slope -6 e^{0.1 t} passes -20 once the speed drops below 60
        traj = build_trajectory(ref(v0=200.0), [("el", 13.5)])
        assert check_lipschitz(traj) > 0.0

    def test_el_above_braking_speed_is_fine(self):
        traj = build_trajectory(ref(v0=200.0), [("el", 12.0)])
        assert check_lipschitz(traj) == 0.0

    def test_velocity_jump_detected(self):
        p = ref(v0=100.0)
        segs = [Segment("vmax", 0.0, 1.0, 100.0), Segment("vmax", 1.0, 1.0, 50.0)]
        traj = Trajectory(segs, p)
        assert traj.continuity_gap() == 50.0
        assert check_lipschitz(traj) > 0.0


class TestPhasePattern:
    def test_seventeen_orders(self):
        assert len(ADMISSIBLE_ORDERS) == 17
        assert BOXED_ORDERS <= ADMISSIBLE_ORDERS

    def test_label_round_trip(self):
        pat = PhasePattern(("alpha", "vmax", "el", "beta"), True)
        assert pat.label == "alpha>vmax>EL>beta>0"
        assert PhasePattern.from_label(pat.label) == pat
        assert pat.admissible and pat.boxed

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            PhasePattern(("gamma",))

    def test_trajectory_pattern_skips_empty_segments(self):
        p = ref(v0=100.0)
        traj = build_trajectory(p, [("alpha", 0.0), ("el", 3.0), ("beta", None), ("zero", math.inf)])
        assert traj.pattern().label == "EL>beta>0"


class TestTrajectoryStructure:
    def test_rejects_gaps(self):
        with pytest.raises(ValueError):
            Trajectory([Segment("vmax", 0.0, 1.0, 200.0), Segment("vmax", 2.0, 1.0, 200.0)], ref())

    def test_only_holds_may_be_infinite(self):
        with pytest.raises(ValueError):
            Segment("alpha", 0.0, math.inf, 0.0)

    def test_dict_round_trip(self):
        traj = build_trajectory(ref(v0=100.0), [("alpha", 5.0), ("el", 4.0), ("beta", None), ("zero", math.inf)])
        again = Trajectory.from_dict(traj.to_dict(), traj.problem)
        t = np.linspace(0.0, 40.0, 101)
        np.testing.assert_array_equal(again.velocity(t), traj.velocity(t))
        assert traj.to_dict()["segments"][-1]["duration"] is None

    def test_stop_time(self):
        traj = build_trajectory(ref(v0=200.0, d=1000.0), [("beta", None), ("zero", math.inf)])
        assert traj.stop_time == pytest.approx(10.0)


_pieces = st.lists(
    st.tuples(st.sampled_from(["alpha", "beta", "vmax", "el"]), st.floats(0.01, 4.0)),
    min_size=1,
    max_size=6,
)


def _clip_pieces(p, pieces):
    # keep every segment inside [0, v_max] and the slope cone
    out, v = [], p.v0
    for kind, dur in pieces:
        if kind == "alpha":
            dur = min(dur, (p.v_max - v) / p.alpha)
            v += p.alpha * dur
        elif kind == "beta":
            dur = min(dur, v / p.beta)
            v -= p.beta * dur
        elif kind == "vmax":
            if v != p.v_max:
                continue
        else:
            # EL slope stays above -beta while v >= 60 for these parameters
            lo = max(60.0, 0.0)
            if v <= lo:
                continue
            dur = min(dur, math.log((260.0 - lo) / (260.0 - v)) / 0.1)
            v = 260.0 - (260.0 - v) * math.exp(0.1 * dur)
        if dur > 0:
            out.append((kind, dur))
    return out


@settings(max_examples=40, deadline=None)
@given(v0=st.floats(0.0, 200.0), pieces=_pieces, a=st.floats(0.0, 1.0), b=st.floats(0.0, 1.0))
def test_position_is_integral_of_velocity(v0, pieces, a, b):
    p = ref(v0=v0)
    pieces = _clip_pieces(p, pieces)
    if not pieces:
        return
    traj = build_trajectory(p, pieces)
    end = traj.finite_end
    t1, t2 = sorted((a * end, b * end))
    num, _ = quad(lambda s: float(traj.velocity(s)[0]), t1, t2, points=traj.breakpoints()[1:-1] if t2 > t1 else None, limit=200, epsabs=1e-11)
    assert abs((position_at(traj, t2) - position_at(traj, t1)) - num) <= 1e-8 * max(1.0, num)


@settings(max_examples=40, deadline=None)
@given(v0=st.floats(0.0, 200.0), pieces=_pieces)
def test_position_non_decreasing_and_cone(v0, pieces):
    p = ref(v0=v0)
    pieces = _clip_pieces(p, pieces)
    if not pieces:
        return
    traj = build_trajectory(p, pieces)
    t = np.linspace(0.0, traj.finite_end * 1.1, 2001)
    assert np.all(np.diff(traj.position(t)) >= -1e-9)
    assert traj.continuity_gap() <= 1e-9
    assert check_lipschitz(traj, 4001) <= 1e-9
