"""Integral-preserving perturbations of a velocity profile.

A perturbation raises the profile on one interval and lowers it on another
by the same area.  Raising mixes the profile with its upper tent on the
interval, the pointwise largest profile that leaves the endpoints through
full acceleration and full braking under ``v_max``; lowering mixes it with
the lower tent, made of full braking, full acceleration and rest.  Convex
mixtures of slope-cone profiles that agree at the interval ends stay in the
cone, so every perturbation is feasible without projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..kinematics import ProblemSpec, Trajectory
from ..quadrature import integrate

__all__ = ["Tent", "Perturbation", "PerturbationResult", "perturbation_delta", "perturbation_test"]


@dataclass(frozen=True)
class Tent:
    """Piecewise-linear extreme profile on ``[left, right]``."""

    left: float
    right: float
    knots: np.ndarray
    values: np.ndarray

    @classmethod
    def build(cls, traj: Trajectory, left: float, right: float, upper: bool) -> "Tent":
        p = traj.problem
        a, b, vm = p.alpha, p.beta, p.v_max
        vl, vr = traj.velocity([left, right])
        if upper:
            cand = [(vr - vl + a * left + b * right) / (a + b), left + (vm - vl) / a, right - (vm - vr) / b]
        else:
            cand = [(vl - vr + b * left + a * right) / (a + b), left + vl / b, right - vr / a]
        t = np.unique(np.clip(np.array([left, right] + cand), left, right))
        if upper:
            v = np.minimum(np.minimum(vl + a * (t - left), vr + b * (right - t)), vm)
        else:
            v = np.maximum(np.maximum(vl - b * (t - left), vr - a * (right - t)), 0.0)
        return cls(left, right, t, v)

    def value(self, t):
        return np.interp(t, self.knots, self.values)

    def integral(self, t):
        """Area under the tent from ``left`` to ``t`` (clipped to the interval)."""
        t = np.clip(np.asarray(t, dtype=float), self.left, self.right)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(self.knots) * (self.values[:-1] + self.values[1:]))])
        i = np.clip(np.searchsorted(self.knots, t, side="right") - 1, 0, self.knots.size - 2)
        s = t - self.knots[i]
        return cum[i] + 0.5 * s * (self.values[i] + self.value(t))

    @property
    def area(self) -> float:
        return float(self.integral(self.right))


@dataclass(frozen=True)
class Perturbation:
    """Raise by weight ``up_weight`` on ``up`` and lower by ``down_weight`` on ``down``."""

    up: Tent
    down: Tent
    up_weight: float
    down_weight: float

    def describe(self) -> dict:
        return {
            "raise_interval": [self.up.left, self.up.right],
            "lower_interval": [self.down.left, self.down.right],
            "raise_weight": self.up_weight,
            "lower_weight": self.down_weight,
        }


class _Perturbed:
    """Velocity and position of a perturbed profile."""

    def __init__(self, traj: Trajectory, pert: Perturbation):
        self.traj = traj
        self.pert = pert

    def _dv(self, t, v):
        out = np.zeros_like(t)
        for tent, w in ((self.pert.up, self.pert.up_weight), (self.pert.down, self.pert.down_weight)):
            m = (t >= tent.left) & (t <= tent.right)
            out[m] += w * (tent.value(t[m]) - v[m])
        return out

    def _dx(self, t):
        out = np.zeros_like(t)
        for tent, w in ((self.pert.up, self.pert.up_weight), (self.pert.down, self.pert.down_weight)):
            tc = np.clip(t, tent.left, tent.right)
            base = self.traj.position(tc) - self.traj.position(np.array([tent.left]))[0]
            out += w * (tent.integral(tc) - base)
        return out

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        v = self.traj.velocity(t)
        return v + self._dv(t, v)

    def state(self, t):
        t = np.asarray(t, dtype=float)
        v = self.traj.velocity(t)
        x = self.traj.position(t)
        return v, x, v + self._dv(t, v), x + self._dx(t)


def _window(pert: Perturbation):
    return min(pert.up.left, pert.down.left), max(pert.up.right, pert.down.right)


def perturbation_delta(traj: Trajectory, pert: Perturbation, atol: float = 1e-13) -> float:
    """Change in expected arrival time caused by ``pert``.

    Only the window spanned by the two intervals contributes, since the
    perturbed profile rejoins the original in speed and position after it.
    """
    if pert.up_weight == 0 and pert.down_weight == 0:
        return 0.0
    p = traj.problem
    w = _Perturbed(traj, pert)
    lo, hi = _window(pert)

    def fun(t):
        v, x, vw, xw = w.state(t)
        dk = (v - vw) * (2.0 * p.v_max - v - vw) / (2.0 * p.alpha * p.v_max) - (xw - x) / p.v_max
        return dk * p.dist.pdf(t)

    bps = traj.breakpoints()
    pts = np.concatenate(
        [[lo, hi], bps[(bps > lo) & (bps < hi)], pert.up.knots, pert.down.knots, p.dist.breakpoints()]
    )
    pts = pts[(pts >= lo) & (pts <= hi)]
    if math.isfinite(p.q):
        pts = np.minimum(pts, p.q)
    return integrate(fun, pts, atol=atol)


def _feasible(traj: Trajectory, pert: Perturbation, n: int = 257) -> bool:
    p = traj.problem
    lo, hi = _window(pert)
    t = np.unique(np.concatenate([np.linspace(lo, hi, n), pert.up.knots, pert.down.knots]))
    w = _Perturbed(traj, pert)
    v = w.velocity(t)
    slope = np.diff(v) / np.maximum(np.diff(t), 1e-300)
    tol = 1e-7 * max(p.alpha, p.beta)
    ok_slope = np.all((slope <= p.alpha + tol) | (np.diff(t) < 1e-9)) and np.all((slope >= -p.beta - tol) | (np.diff(t) < 1e-9))
    ok_range = v.min() >= -1e-9 * p.v_max and v.max() <= p.v_max * (1 + 1e-12)
    _, x, _, xw = w.state(np.array([hi]))
    ok_dist = abs(xw[0] - x[0]) <= 1e-9 * max(1.0, p.d)
    return bool(ok_slope and ok_range and ok_dist)


@dataclass
class PerturbationResult:
    """Summary of :func:`perturbation_test`.

    Attributes
    ----------
    min_delta : float
        Smallest cost change found; negative values expose a better profile.
    worst : dict
        Description of the perturbation achieving ``min_delta``.
    deltas : ndarray
    resampled : int
        Draws rejected for carrying no area or failing validation.
    """

    min_delta: float
    worst: dict
    deltas: np.ndarray
    resampled: int = 0
    extra: dict = field(default_factory=dict)


def _span(traj: Trajectory) -> float:
    p = traj.problem
    if math.isfinite(p.q):
        return p.q
    stop = traj.stop_time
    if not math.isfinite(stop):
        stop = traj.finite_end
    return 1.25 * max(stop, 1e-6)


def perturbation_test(
    traj: Trajectory,
    p: Optional[ProblemSpec] = None,
    n: int = 1000,
    seed: int = 0,
    max_attempts: Optional[int] = None,
) -> PerturbationResult:
    """Apply ``n`` random integral-preserving perturbations and report the best gain.

    Interval lengths are log-uniform between 0.1% and half of the active
    span, and the mixing amplitude is log-uniform in ``[1e-3, 1]``.
    """
    if p is not None and p is not traj.problem:
        traj = Trajectory(traj.segments, p)
    p = traj.problem
    rng = np.random.default_rng(seed)
    span = _span(traj)
    deltas = []
    worst = {}
    best = math.inf
    resampled = 0
    max_attempts = 50 * n if max_attempts is None else max_attempts
    attempts = 0
    while len(deltas) < n and attempts < max_attempts:
        attempts += 1
        ints = []
        for _ in range(2):
            length = span * 10 ** rng.uniform(-3, math.log10(0.5))
            start = rng.uniform(0.0, span - length)
            ints.append((start, start + length))
        (l1, r1), (l2, r2) = ints
        if not (r1 <= l2 or r2 <= l1):
            resampled += 1
            continue
        up = Tent.build(traj, l1, r1, upper=True)
        down = Tent.build(traj, l2, r2, upper=False)
        seg_up = float(np.diff(traj.position([l1, r1]))[0])
        seg_down = float(np.diff(traj.position([l2, r2]))[0])
        m_up = up.area - seg_up
        m_down = seg_down - down.area
        tiny = 1e-10 * max(1.0, p.d)
        if m_up <= tiny or m_down <= tiny:
            resampled += 1
            continue
        eps = 10 ** rng.uniform(-3, 0)
        w_down = eps
        w_up = eps * m_down / m_up
        if w_up > 1.0:
            w_up = eps
            w_down = eps * m_up / m_down
        pert = Perturbation(up, down, w_up, w_down)
        if not _feasible(traj, pert):
            resampled += 1
            continue
        delta = perturbation_delta(traj, pert)
        deltas.append(delta)
        if delta < best:
            best = delta
            worst = dict(pert.describe(), delta=delta)
    return PerturbationResult(best, worst, np.array(deltas), resampled)
