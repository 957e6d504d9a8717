"""Exact optimal approach when the red time is exponentially distributed.

The optimal profile descends an EL curve and switches to full braking at a
speed ``v_c*`` that depends only on the physics and the rate.  The initial
speed and the distance then pick one region of the ``(v0, d)`` plane, and a
single free parameter is fixed by the distance constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy.optimize import brentq

from .cost import expected_arrival
from .distributions import ExponentialGreen
from .euler_lagrange import asymptote, el_distance, el_duration
from .kinematics import PhasePattern, ProblemSpec, Trajectory, build_trajectory, validate_problem
from .report import InfeasibleProblem, SolveReport, trajectory_diagnostics, transitions

__all__ = [
    "ExpSolverState",
    "SwitchSpeed",
    "f_of_vc",
    "solve_vc_star",
    "vc_prime",
    "exp_state",
    "region_boundaries",
    "classify_region",
    "assemble_switch_family",
    "solve_exponential",
]

_ROOT_XTOL = 1e-13
_ROOT_RTOL = 1e-15
_TIE = 1e-12


def _rate(p: ProblemSpec) -> float:
    if not isinstance(p.dist, ExponentialGreen):
        raise TypeError("this solver needs an exponential red-time law")
    return p.dist.rate


def f_of_vc(v_c: float, p: ProblemSpec) -> float:
    """Switch-speed equation whose positive root is the optimal switch speed.

    ``-(r^2/beta) v^2 + (r/beta)(beta + r A) v + (exp(-r v / beta) - 1)(beta + r A)``
    with ``r`` the rate.  It vanishes to second order at ``v = 0``.
    """
    lam = _rate(p)
    A = asymptote(p.alpha, p.v_max, lam)
    k = p.beta + lam * A
    return -(lam * lam / p.beta) * v_c * v_c + (lam / p.beta) * k * v_c + math.expm1(-lam * v_c / p.beta) * k


@dataclass(frozen=True)
class SwitchSpeed:
    """Result of :func:`solve_vc_star`.

    Attributes
    ----------
    v_c_star : float or None
        Root of :func:`f_of_vc` above ``v_beta``; None when no switch exists.
    exceeds_vmax : bool
        True when the root is at or above ``v_max``; EL arcs then never occur.
    no_switch : bool
        True when ``v_beta <= 0``: EL arcs never get steeper than braking.
    """

    v_c_star: Optional[float]
    exceeds_vmax: bool
    no_switch: bool = False


def solve_vc_star(p: ProblemSpec, cap: float = 1e6) -> SwitchSpeed:
    """Locate the optimal switch speed by a bracketed root search.

    The bracket starts at ``v_beta``, where the equation is positive, and
    its upper end doubles until the sign changes.

    Raises
    ------
    RuntimeError
        If no sign change appears below ``cap * v_max``.
    """
    lam = _rate(p)
    vb = p.v_max + (p.alpha - p.beta) / lam
    if vb <= 0:
        return SwitchSpeed(None, False, True)
    lo = vb
    hi = max(2.0 * vb, p.v_max)
    while f_of_vc(hi, p) >= 0:
        lo = hi
        hi *= 2.0
        if hi > cap * p.v_max:
            raise RuntimeError("switch-speed equation shows no sign change; parameters look corrupted")
    root = brentq(f_of_vc, lo, hi, args=(p,), xtol=_ROOT_XTOL * hi, rtol=_ROOT_RTOL, maxiter=200)
    return SwitchSpeed(root, root >= p.v_max)


def vc_prime(v_c: float, p: ProblemSpec) -> float:
    """Rate of change of the switch speed with respect to the switch time."""
    lam = _rate(p)
    A = asymptote(p.alpha, p.v_max, lam)
    num = -lam * p.beta * p.v_max * (A - v_c)
    return num / (p.beta * (p.v_max - v_c) + lam * (A - v_c) * v_c)


@dataclass(frozen=True)
class ExpSolverState:
    """Quantities shared by every ``(v0, d)`` for fixed physics and rate.

    Attributes
    ----------
    A : float
        EL asymptote ``v_max + alpha / rate``.
    v_beta : float
        Speed where the EL slope equals ``-beta``.
    v_c_star : float or None
        Optimal switch speed, None when ``v_beta <= 0``.
    exceeds_vmax : bool
    regime : {'i', 'ii', 'iii'}
        ``i``: EL then braking; ``ii``: no EL arcs; ``iii``: EL down to rest.
    """

    A: float
    v_beta: float
    v_c_star: Optional[float]
    exceeds_vmax: bool
    regime: str
    rate: float


def exp_state(p: ProblemSpec) -> ExpSolverState:
    lam = _rate(p)
    A = asymptote(p.alpha, p.v_max, lam)
    vb = p.v_max + (p.alpha - p.beta) / lam
    sw = solve_vc_star(p)
    if sw.no_switch:
        regime = "iii"
    elif sw.exceeds_vmax:
        regime = "ii"
    else:
        regime = "i"
    return ExpSolverState(A, vb, sw.v_c_star, sw.exceeds_vmax, regime, lam)


def region_boundaries(v0: float, st: ExpSolverState, p: ProblemSpec, switch: Optional[float] = None) -> dict:
    """Distances at which the optimal pattern changes, for initial speed ``v0``.

    Parameters
    ----------
    switch : float, optional
        Override of the switch speed, used to build non-optimal families.
    """
    a, b, vm, lam, A = p.alpha, p.beta, p.v_max, st.rate, st.A
    out = {"stop": v0 * v0 / (2 * b)}
    regime = st.regime if switch is None else "i"
    c = st.v_c_star if switch is None else switch
    if regime == "i":
        out["peak_at_switch"] = c * c * (0.5 / b + 0.5 / a) - v0 * v0 / (2 * a)
        out["el_from_vmax"] = (vm * vm - v0 * v0) / (2 * a) + el_distance(vm, c, lam, A) + c * c / (2 * b)
        if v0 >= c:
            out["el_from_v0"] = el_distance(v0, c, lam, A) + c * c / (2 * b)
    elif regime == "ii":
        out["peak_at_vmax"] = vm * vm * (0.5 / a + 0.5 / b) - v0 * v0 / (2 * a)
    else:
        out["el_from_v0"] = el_distance(v0, 0.0, lam, A)
        out["el_from_vmax"] = (vm * vm - v0 * v0) / (2 * a) + el_distance(vm, 0.0, lam, A)
    return out


def _eq(x: float, y: float) -> bool:
    return abs(x - y) <= _TIE * max(1.0, abs(y))


def _tag(seq, v0, vm, alpha):
    # an initial alpha phase from v0 = v_max has (numerically) zero length
    if seq and seq[0] == "alpha" and len(seq) > 1 and seq[1] == "vmax" and (vm - v0) / alpha < 1e-12:
        seq = seq[1:]
    return PhasePattern(tuple(seq), True)


def classify_region(
    v0: float, d: float, st: ExpSolverState, p: ProblemSpec, switch: Optional[float] = None
) -> PhasePattern:
    """Optimal pattern at ``(v0, d)`` from the closed-form region boundaries.

    Points on a boundary get the pattern with fewer segments.

    Raises
    ------
    InfeasibleProblem
        Below the stopping boundary ``d = v0**2 / (2 beta)``.
    """
    bd = region_boundaries(v0, st, p, switch)
    vm = p.v_max
    if d < bd["stop"] and not _eq(d, bd["stop"]):
        raise InfeasibleProblem(["stopping-infeasible"])
    if _eq(d, bd["stop"]) or (v0 == 0 and d <= 0):
        return PhasePattern(("beta",), True) if v0 > 0 else PhasePattern((), True)
    regime = st.regime if switch is None else "i"
    c = st.v_c_star if switch is None else switch
    if regime == "i":
        top = bd["el_from_vmax"]
        if v0 <= c and not _eq(v0, c):
            low = bd["peak_at_switch"]
            if d < low or _eq(d, low):
                return PhasePattern(("alpha", "beta"), True)
        else:
            mid = bd["el_from_v0"]
            if _eq(d, mid):
                return PhasePattern(("el", "beta"), True)
            if d < mid:
                return PhasePattern(("beta", "el", "beta"), True)
        if d < top or _eq(d, top):
            return PhasePattern(("alpha", "el", "beta"), True)
        return _tag(["alpha", "vmax", "el", "beta"], v0, vm, p.alpha)
    if regime == "ii":
        top = bd["peak_at_vmax"]
        if d < top or _eq(d, top):
            return PhasePattern(("alpha", "beta"), True)
        return _tag(["alpha", "vmax", "beta"], v0, vm, p.alpha)
    mid, top = bd["el_from_v0"], bd["el_from_vmax"]
    if _eq(d, mid):
        return PhasePattern(("el",), True)
    if d < mid:
        return PhasePattern(("beta", "el"), True)
    if d < top or _eq(d, top):
        return PhasePattern(("alpha", "el"), True)
    return _tag(["alpha", "vmax", "el"], v0, vm, p.alpha)


def _root(fun, lo, hi, scale):
    flo, fhi = fun(lo), fun(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo > 0:
        return lo
    if fhi < 0:
        return hi
    return brentq(fun, lo, hi, xtol=_ROOT_XTOL * scale, rtol=_ROOT_RTOL, maxiter=200)


def _pieces(v0: float, d: float, pat: PhasePattern, c: float, st: ExpSolverState, p: ProblemSpec) -> list:
    a, b, vm, lam, A = p.alpha, p.beta, p.v_max, st.rate, st.A
    seq = pat.sequence
    end = [("beta", None), ("zero", math.inf)]
    if seq == ():
        return [("zero", math.inf)]
    if seq == ("beta",):
        return end
    if seq == ("alpha", "beta"):
        vp = math.sqrt((d + v0 * v0 / (2 * a)) / (0.5 / a + 0.5 / b))
        vp = min(max(vp, v0), vm)
        return [("alpha", (vp - v0) / a)] + end
    if seq in (("alpha", "vmax", "beta"), ("vmax", "beta")):
        base = (vm * vm - v0 * v0) / (2 * a) + vm * vm / (2 * b)
        return [("alpha", (vm - v0) / a), ("vmax", max(d - base, 0.0) / vm)] + end
    if seq == ("el", "beta"):
        return [("el", el_duration(v0, c, lam, A))] + end
    if seq == ("alpha", "el", "beta"):
        tail = c * c / (2 * b)
        g = lambda va: (va * va - v0 * v0) / (2 * a) + el_distance(va, c, lam, A) + tail - d
        va = _root(g, max(v0, c), vm, vm)
        return [("alpha", (va - v0) / a), ("el", el_duration(va, c, lam, A))] + end
    if seq in (("alpha", "vmax", "el", "beta"), ("vmax", "el", "beta")):
        base = (vm * vm - v0 * v0) / (2 * a) + el_distance(vm, c, lam, A) + c * c / (2 * b)
        return [("alpha", (vm - v0) / a), ("vmax", max(d - base, 0.0) / vm), ("el", el_duration(vm, c, lam, A))] + end
    if seq == ("beta", "el", "beta"):
        tail = c * c / (2 * b)
        h = lambda vb: (v0 * v0 - vb * vb) / (2 * b) + el_distance(vb, c, lam, A) + tail - d
        vb = _root(h, c, v0, vm)
        return [("beta", (v0 - vb) / b), ("el", el_duration(vb, c, lam, A))] + end
    rest = [("zero", math.inf)]
    if seq == ("el",):
        return [("el", el_duration(v0, 0.0, lam, A))] + rest
    if seq == ("beta", "el"):
        h = lambda vb: (v0 * v0 - vb * vb) / (2 * b) + el_distance(vb, 0.0, lam, A) - d
        vb = _root(h, 0.0, v0, vm)
        return [("beta", (v0 - vb) / b), ("el", el_duration(vb, 0.0, lam, A))] + rest
    if seq == ("alpha", "el"):
        g = lambda va: (va * va - v0 * v0) / (2 * a) + el_distance(va, 0.0, lam, A) - d
        va = _root(g, v0, vm, vm)
        return [("alpha", (va - v0) / a), ("el", el_duration(va, 0.0, lam, A))] + rest
    if seq in (("alpha", "vmax", "el"), ("vmax", "el")):
        base = (vm * vm - v0 * v0) / (2 * a) + el_distance(vm, 0.0, lam, A)
        return [("alpha", (vm - v0) / a), ("vmax", max(d - base, 0.0) / vm), ("el", el_duration(vm, 0.0, lam, A))] + rest
    raise ValueError(f"no construction for pattern {pat.label}")


def assemble_switch_family(p: ProblemSpec, v_c: float, st: Optional[ExpSolverState] = None) -> Optional[Trajectory]:
    """Profile that meets ``d`` and switches from an EL arc to braking at ``v_c``.

    The prefix (full acceleration, a ``v_max`` hold or an initial brake) is
    chosen by the same boundaries the solver uses.  Returns None when no
    member of the family switches at ``v_c`` for this ``(v0, d)``.
    """
    st = exp_state(p) if st is None else st
    if not (0 < v_c <= p.v_max) or v_c >= st.A:
        return None
    try:
        pat = classify_region(p.v0, p.d, st, p, switch=v_c)
    except InfeasibleProblem:
        return None
    if "el" not in pat.sequence and pat.sequence not in (("vmax", "beta"), ("alpha", "vmax", "beta")):
        return None
    if "el" not in pat.sequence:
        # switch at v_max: the EL arc has zero length
        pat = PhasePattern(pat.sequence[:-1] + ("el", "beta"), True)
    return build_trajectory(p, _pieces(p.v0, p.d, pat, v_c, st, p))


def solve_exponential(p: ProblemSpec, st: Optional[ExpSolverState] = None, diagnostics: bool = True) -> SolveReport:
    """Optimal profile for an exponentially distributed red time.

    Parameters
    ----------
    p : ProblemSpec
    st : ExpSolverState, optional
        Precomputed regime state, reused across many ``(v0, d)``.
    diagnostics : bool
        Whether to run the continuity, slope and distance audit.

    Raises
    ------
    InfeasibleProblem
        When the instance fails validation.
    """
    _rate(p)
    val = validate_problem(p)
    if not val.ok:
        raise InfeasibleProblem(val.reasons)
    st = exp_state(p) if st is None else st
    pat = classify_region(p.v0, p.d, st, p)
    c = st.v_c_star if st.regime == "i" else 0.0
    traj = build_trajectory(p, _pieces(p.v0, p.d, pat, c, st, p))
    times, speeds = transitions(traj)
    report = SolveReport(
        pattern=traj.pattern(),
        trajectory=traj,
        expected_arrival=expected_arrival(traj, p),
        transition_times=times,
        transition_velocities=speeds,
        validation=val,
        v_c_star=st.v_c_star,
        v_beta=st.v_beta,
        A=st.A,
        exceeds_vmax=st.exceeds_vmax,
        regime=st.regime,
    )
    report.diagnostics["classified_pattern"] = pat.label
    if diagnostics:
        report.diagnostics.update(trajectory_diagnostics(traj))
    return report
