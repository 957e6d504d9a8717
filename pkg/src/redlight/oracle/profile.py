"""Velocity profiles with piecewise-constant acceleration.

Used for DP policy traces; exposes the evaluation interface that the cost
functions expect from a :class:`~redlight.kinematics.Trajectory`.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..kinematics import PhasePattern, ProblemSpec

__all__ = ["AccelProfile"]


class AccelProfile:
    """Profile with constant acceleration between knots.

    Parameters
    ----------
    knots : array_like
        Increasing times starting at 0.
    accel : array_like
        Acceleration on each interval, one fewer than ``knots``.
    problem : ProblemSpec
    """

    def __init__(self, knots: ArrayLike, accel: ArrayLike, problem: ProblemSpec):
        t = np.asarray(knots, dtype=float)
        a = np.asarray(accel, dtype=float)
        if t.ndim != 1 or a.shape != (t.size - 1,):
            raise ValueError("need one acceleration per interval")
        self.problem = problem
        self._t = t
        self._a = a
        h = np.diff(t)
        v = np.empty_like(t)
        x = np.empty_like(t)
        v[0], x[0] = problem.v0, 0.0
        for i in range(a.size):
            v[i + 1] = min(max(v[i] + a[i] * h[i], 0.0), problem.v_max)
            x[i + 1] = x[i] + h[i] * (v[i] + 0.5 * a[i] * h[i])
        self._v = v
        self._x = x

    def _idx(self, t):
        return np.clip(np.searchsorted(self._t, t, side="right") - 1, 0, self._a.size - 1)

    @property
    def finite_end(self) -> float:
        return float(self._t[-1])

    @property
    def terminal_velocity(self) -> float:
        return float(self._v[-1])

    @property
    def end_position(self) -> float:
        return float(self._x[-1])

    @property
    def stop_time(self) -> float:
        if self._v[-1] > 0:
            return math.inf
        moving = np.flatnonzero(self._v > 0)
        if moving.size == 0:
            return 0.0
        return float(self._t[min(moving[-1] + 1, self._t.size - 1)])

    def velocity(self, t: ArrayLike) -> NDArray[np.float64]:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        i = self._idx(t)
        s = np.clip(t - self._t[i], 0.0, None)
        out = np.minimum(np.maximum(self._v[i] + self._a[i] * s, 0.0), self.problem.v_max)
        return np.where(t >= self._t[-1], self._v[-1], out)

    def position(self, t: ArrayLike) -> NDArray[np.float64]:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        i = self._idx(t)
        s = np.clip(np.minimum(t, self._t[-1]) - self._t[i], 0.0, None)
        out = self._x[i] + s * (self._v[i] + 0.5 * self._a[i] * s)
        return np.where(t >= self._t[-1], self._x[-1] + self._v[-1] * (t - self._t[-1]), out)

    def breakpoints(self) -> NDArray[np.float64]:
        return self._t.copy()

    def pattern(self, min_duration: float = 0.0, speed_tol: float = 1e-9, window: float | None = None) -> PhasePattern:
        """Coarse phase pattern: runs of the same acceleration class.

        Intermediate accelerations read as EL descent.  With ``window`` the
        mean slope over consecutive windows is classified instead, so that
        grid chatter between two controls reads as the slope it averages to;
        slopes within 5% of a bound count as that bound.
        """
        p = self.problem
        if window is None:
            t = self._t
            v = self._v
            slopes = self._a
            rel = 1e-12
        else:
            n = max(int(math.ceil(self._t[-1] / window)), 1)
            t = np.linspace(0.0, self._t[-1], n + 1)
            v = self.velocity(t)
            slopes = np.diff(v) / np.diff(t)
            rel = 0.05
        kinds = []
        for i, a in enumerate(slopes):
            vm = 0.5 * (v[i] + v[i + 1])
            if max(v[i], v[i + 1]) <= speed_tol:
                k = "zero"
            elif a >= p.alpha * (1 - rel):
                k = "alpha"
            elif a <= -p.beta * (1 - rel):
                k = "beta"
            elif abs(a) <= rel * p.alpha and vm >= p.v_max * (1 - rel) - speed_tol:
                k = "vmax"
            else:
                k = "el"
            dur = t[i + 1] - t[i]
            if kinds and kinds[-1][0] == k:
                kinds[-1][1] += dur
            else:
                kinds.append([k, dur])
        runs = [k for k, dur in kinds if dur > min_duration]
        merged = []
        for k in runs:
            if not merged or merged[-1] != k:
                merged.append(k)
        zero = bool(merged) and merged[-1] == "zero"
        seq = tuple(k for k in merged if k != "zero")
        return PhasePattern(seq, zero)
