"""Exact optimal approach when the red time is uniform on ``[0, q]``.

The feasible ``(t, v)`` region is a tank bounded by the braking ramp and the
floor below, the acceleration ramp and the speed limit above, and ``t = q``
on the right.  EL curves are lines of slope ``-alpha``; the optimal profile
is the tank's upper boundary clipped by the line ``v = c - alpha t`` whose
enclosed area equals ``d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cost import expected_arrival
from .distributions import GreenDistribution, UniformGreen
from .kinematics import PhasePattern, ProblemSpec, Trajectory, build_trajectory, validate_problem
from .report import InfeasibleProblem, SolveReport, trajectory_diagnostics, transitions

__all__ = [
    "UniformTank",
    "tank_area_at_level",
    "level_profile",
    "critical_levels",
    "uniform_boundaries",
    "uniform_phase_region",
    "solve_uniform",
]

_TIE = 1e-12


@dataclass(frozen=True)
class UniformTank:
    """Walls of the feasible region for initial speed ``v0`` and horizon ``q``."""

    v0: float
    alpha: float
    beta: float
    v_max: float
    q: float

    @classmethod
    def for_problem(cls, p: ProblemSpec, v0: float | None = None) -> "UniformTank":
        return cls(p.v0 if v0 is None else v0, p.alpha, p.beta, p.v_max, p.q)

    @property
    def t1(self) -> float:
        """Time to stop under full braking."""
        return self.v0 / self.beta

    @property
    def t2(self) -> float:
        """Time an EL line through the start point takes to reach rest."""
        return self.v0 / self.alpha

    @property
    def t3(self) -> float:
        """Time to reach ``v_max`` under full acceleration."""
        return (self.v_max - self.v0) / self.alpha

    @property
    def t4(self) -> float:
        """Time the EL line through the top corner reaches rest."""
        return self.t3 + self.v_max / self.alpha

    def lower(self, t):
        return np.maximum(0.0, self.v0 - self.beta * np.asarray(t, dtype=float))

    def upper(self, t):
        return np.minimum(self.v_max, self.v0 + self.alpha * np.asarray(t, dtype=float))

    def surface(self, c: float, t):
        """Speed on the water surface at level intercept ``c``."""
        line = c - self.alpha * np.asarray(t, dtype=float)
        return np.maximum(self.lower(t), np.minimum(self.upper(t), line))

    def breakpoints(self, c: float) -> np.ndarray:
        """Times in ``[0, q]`` where the surface can change slope."""
        a, b = self.alpha, self.beta
        cand = [0.0, self.q, self.t1, self.t3, c / a, (c - self.v0) / (2 * a), (c - self.v_max) / a]
        if a != b:
            cand.append((c - self.v0) / (a - b))
        pts = np.array(cand)
        pts = pts[np.isfinite(pts) & (pts >= 0.0) & (pts <= self.q)]
        return np.unique(pts)

    def vertices(self) -> list:
        """Corners of the tank polygon as ``(t, v)`` pairs."""
        out = [(0.0, self.v0)]
        if self.t1 < self.q:
            out += [(self.t1, 0.0), (self.q, 0.0)]
        else:
            out.append((self.q, self.v0 - self.beta * self.q))
        if self.t3 < self.q:
            out += [(self.t3, self.v_max), (self.q, self.v_max)]
        else:
            out.append((self.q, self.v0 + self.alpha * self.q))
        return out


def tank_area_at_level(tank: UniformTank, c: float) -> float:
    """Area under the water surface at level intercept ``c``.

    The surface is piecewise linear between :meth:`UniformTank.breakpoints`,
    so the trapezoid rule over those points is exact.
    """
    t = tank.breakpoints(c)
    v = tank.surface(c, t)
    return float(np.sum(0.5 * np.diff(t) * (v[:-1] + v[1:])))


def _piece_kind(tank: UniformTank, c: float, t: float) -> str:
    lo = float(tank.lower(t))
    up = float(tank.upper(t))
    line = c - tank.alpha * t
    if line >= up:
        return "alpha" if tank.v0 + tank.alpha * t < tank.v_max else "vmax"
    if line <= lo:
        return "beta" if tank.v0 - tank.beta * t > 0 else "zero"
    return "el"


def level_profile(tank: UniformTank, c: float, min_duration: float = 1e-12) -> list:
    """Segment kinds and durations of the surface at level ``c``.

    Walls win ties with the level line.
    """
    t = tank.breakpoints(c)
    pieces: list = []
    for a, b in zip(t[:-1], t[1:]):
        if b - a < min_duration:
            continue
        kind = _piece_kind(tank, c, 0.5 * (a + b))
        if pieces and pieces[-1][0] == kind:
            pieces[-1] = (kind, pieces[-1][1] + (b - a))
        else:
            pieces.append((kind, b - a))
    return pieces


def _pattern_of(pieces: list) -> PhasePattern:
    seq = [k for k, _ in pieces if k != "zero"]
    zero = bool(pieces) and pieces[-1][0] == "zero"
    return PhasePattern(tuple(seq), zero)


def critical_levels(tank: UniformTank) -> np.ndarray:
    """Level intercepts at which the surface passes through a tank corner.

    Between consecutive critical levels the pattern does not change.
    """
    return np.unique([v + tank.alpha * t for t, v in tank.vertices()])


def uniform_boundaries(p: ProblemSpec, v0: float) -> np.ndarray:
    """Distances ``d`` at which the optimal pattern changes for initial speed ``v0``."""
    tank = UniformTank.for_problem(p, v0)
    return np.unique([tank_area_at_level(tank, c) for c in critical_levels(tank)])


def uniform_phase_region(p: ProblemSpec, v0: float, d: float) -> PhasePattern:
    """Optimal pattern at ``(v0, d)`` without solving for the exact level.

    The critical levels split the ``d`` axis into intervals of constant
    pattern; the pattern is read off at any level inside the interval that
    contains ``d``.  ``d`` on a boundary gets the boundary's own pattern,
    which has the fewest segments.  For the ordering
    ``t1 <= t2 <= t3 <= t4 <= q`` the boundaries are ``v0**2/(2 beta)``,
    ``v0**2/(2 alpha)``, ``v_max**2/alpha - v0**2/(2 alpha)``, the level
    through ``(q, 0)`` and the full tank.
    """
    tank = UniformTank.for_problem(p, v0)
    levels = critical_levels(tank)
    areas = np.array([tank_area_at_level(tank, c) for c in levels])
    if d < areas[0] * (1 - _TIE):
        raise InfeasibleProblem(["stopping-infeasible"])
    hit = np.flatnonzero(np.abs(areas - d) <= _TIE * max(1.0, d))
    if hit.size:
        # flat stretches of the area curve share one pattern; take the lowest level
        c = levels[hit[0]]
    elif d > areas[-1]:
        c = levels[-1] + 1.0
    else:
        k = int(np.searchsorted(areas, d, side="right"))
        c = 0.5 * (levels[k - 1] + levels[k])
    return _pattern_of(level_profile(tank, c))


def _fill_level(tank: UniformTank, d: float, max_iter: int = 200) -> float:
    lo, hi = 0.0, tank.v_max + tank.alpha * tank.q
    tol = 1e-9 * max(1.0, d)
    c = 0.5 * (lo + hi)
    for _ in range(max_iter):
        c = 0.5 * (lo + hi)
        area = tank_area_at_level(tank, c)
        if abs(area - d) <= 1e-3 * tol or hi - lo <= 4 * np.finfo(float).eps * hi:
            break
        if area < d:
            lo = c
        else:
            hi = c
    return c


def _report(p, traj, val, level, diagnostics, trivial=False):
    times, speeds = transitions(traj)
    rep = SolveReport(
        pattern=traj.pattern(),
        trajectory=traj,
        expected_arrival=expected_arrival(traj, p),
        transition_times=times,
        transition_velocities=speeds,
        validation=val,
        level=level,
        regime="trivial" if trivial else "tank",
    )
    if diagnostics:
        rep.diagnostics.update(trajectory_diagnostics(traj))
    rep.diagnostics["trivial"] = trivial
    return rep


def solve_uniform(p: ProblemSpec, diagnostics: bool = True) -> SolveReport:
    """Optimal profile for a uniformly distributed red time.

    Trivial instances, where the light cannot be reached before ``q``,
    return the full-speed profile flagged ``trivial``.

    Raises
    ------
    InfeasibleProblem
        When the instance fails validation other than triviality.
    """
    if not isinstance(p.dist, UniformGreen):
        raise TypeError("this solver needs a uniform red-time law")
    val = validate_problem(p)
    hard = [r for r in val.reasons if r != "light-unreachable"]
    if hard:
        raise InfeasibleProblem(hard)
    tank = UniformTank.for_problem(p)
    if val.trivial:
        c = tank.v_max + tank.alpha * tank.q
        traj = build_trajectory(p, level_profile(tank, c))
        return _report(p, traj, val, c, diagnostics, trivial=True)
    c = _fill_level(tank, p.d)
    traj = build_trajectory(p, level_profile(tank, c))
    return _report(p, traj, val, c, diagnostics)
