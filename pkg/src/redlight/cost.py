"""Expected arrival time of a profile and the pressure form of the same objective."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .distributions import ExponentialGreen, GreenDistribution
from .kinematics import ProblemSpec, Trajectory
from .quadrature import integrate

__all__ = [
    "k_remainder",
    "remaining_time",
    "expected_arrival",
    "expected_arrival_mc",
    "MCEstimate",
    "PressureField",
    "pressure",
    "pressure_action",
    "arrival_integrand",
]


def remaining_time(x: ArrayLike, v: ArrayLike, p: ProblemSpec) -> NDArray[np.float64]:
    """Vectorised time to the destination once the light turns green.

    No range checks; see :func:`k_remainder` for the checked scalar form.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return (p.v_max - v) ** 2 / (2.0 * p.alpha * p.v_max) + (p.L - x) / p.v_max


def k_remainder(x: float, v: float, p: ProblemSpec) -> float:
    """Time to reach the destination from position ``x`` at speed ``v``.

    Accelerate fully to ``v_max`` and cruise; valid because the destination
    lies beyond the distance needed to reach ``v_max`` from rest.

    Raises
    ------
    ValueError
        If ``v`` is outside ``[0, v_max]`` or ``x`` beyond ``L``.
    """
    if not 0.0 <= v <= p.v_max:
        raise ValueError(f"speed {v} outside [0, v_max]")
    if x > p.L:
        raise ValueError(f"position {x} beyond the destination {p.L}")
    return float(remaining_time(x, v, p))


def arrival_integrand(traj: Trajectory, p: ProblemSpec):
    """Return ``t -> (t + k(x(t), v(t))) f(t)`` for ``traj``."""

    def fun(t):
        return (t + remaining_time(traj.position(t), traj.velocity(t), p)) * p.dist.pdf(t)

    return fun


def _tail_after_stop(dist: ExponentialGreen, t_stop: float, k_stop: float) -> float:
    # int_{t_s}^inf (t + k) lam e^{-lam t} dt
    return math.exp(-dist.rate * t_stop) * (t_stop + 1.0 / dist.rate + k_stop)


def expected_arrival(traj: Trajectory, p: ProblemSpec | None = None, atol: float = 1e-11) -> float:
    """Expected arrival time at the destination, ``E[T + k(x(T), v(T))]``.

    Quadrature is split at every segment boundary.  For the exponential law
    the standstill tail after the last stop is added in closed form.

    Parameters
    ----------
    traj : Trajectory
    p : ProblemSpec, optional
        Defaults to ``traj.problem``.
    atol : float
        Absolute quadrature tolerance.
    """
    p = traj.problem if p is None else p
    dist = p.dist
    fun = arrival_integrand(traj, p)
    q = dist.q_support
    if math.isfinite(q):
        pts = np.concatenate([[0.0, q], traj.breakpoints(), dist.breakpoints()])
        return integrate(fun, pts[pts <= q], atol=atol)
    stop = traj.stop_time
    if math.isfinite(stop) and isinstance(dist, ExponentialGreen):
        pts = np.concatenate([[0.0, stop], traj.breakpoints()])
        body = integrate(fun, pts[pts <= stop], atol=atol) if stop > 0 else 0.0
        k_stop = float(remaining_time(traj.position(stop)[0], 0.0, p))
        return body + _tail_after_stop(dist, stop, k_stop)
    end = max(dist.horizon, traj.finite_end)
    pts = np.concatenate([[0.0, end], traj.breakpoints()])
    return integrate(fun, pts, atol=atol)


@dataclass(frozen=True)
class MCEstimate:
    """Monte-Carlo estimate with its standard error."""

    mean: float
    std_error: float


def expected_arrival_mc(
    traj: Trajectory,
    p: ProblemSpec | None = None,
    n: int = 100_000,
    seed: Union[int, np.random.Generator, None] = 0,
    chunk: int = 250_000,
) -> MCEstimate:
    """Estimate the expected arrival time by sampling the red time.

    Red times are drawn by inverse-CDF sampling from a generator created per
    call, so fixed seeds reproduce results exactly.
    """
    if n < 1:
        raise ValueError("n must be positive")
    p = traj.problem if p is None else p
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    shift = None
    done = 0
    while done < n:
        m = min(chunk, n - done)
        t = p.dist.ppf(rng.random(m))
        vals = t + remaining_time(traj.position(t), traj.velocity(t), p)
        # moments about the first draw; raw moments cancel when the spread is tiny
        if shift is None:
            shift = float(vals[0])
        dev = vals - shift
        total += math.fsum(dev)
        total_sq += math.fsum(dev * dev)
        done += m
    mean_dev = total / n
    var = max(total_sq / n - mean_dev * mean_dev, 0.0) * n / max(n - 1, 1)
    return MCEstimate(shift + mean_dev, math.sqrt(var / n))


@dataclass(frozen=True)
class PressureField:
    """``P(t, C) = -(v_max - C) f(t) + alpha F(t) + B``.

    Parameters
    ----------
    B : float
        Offset fixing which isobar is the zero level.
    dist : GreenDistribution
    alpha, v_max : float
    """

    B: float
    dist: GreenDistribution
    alpha: float
    v_max: float

    @classmethod
    def for_problem(cls, p: ProblemSpec, B: float = 0.0) -> "PressureField":
        return cls(B, p.dist, p.alpha, p.v_max)


def pressure(pf: PressureField, t: ArrayLike, C: ArrayLike):
    """Evaluate the pressure field at time ``t`` and speed level ``C``."""
    out = -(pf.v_max - np.asarray(C, dtype=float)) * pf.dist.pdf(t) + pf.alpha * pf.dist.cdf(t) + pf.B
    return float(out) if np.ndim(out) == 0 else out


def pressure_action(traj: Trajectory, pf: PressureField, atol: float = 1e-11) -> float:
    """Integral of the pressure over the region under the velocity profile.

    The inner integral over speed levels is done in closed form, leaving a
    one-dimensional quadrature in time.  For profiles sharing the same
    distance ``d`` the result ranks them like :func:`expected_arrival`:
    ``S = E[T] + (L - d)/v_max + v_max/(2 alpha) + (action - B d)/(alpha v_max)``.
    """
    dist = pf.dist

    def fun(t):
        v = traj.velocity(t)
        f = dist.pdf(t)
        return v * (f * (0.5 * v - pf.v_max) + pf.alpha * dist.cdf(t) + pf.B)

    end = traj.stop_time
    if not math.isfinite(end):
        end = dist.q_support if math.isfinite(dist.q_support) else max(dist.horizon, traj.finite_end)
    end = min(end, dist.q_support)
    if end <= 0:
        return 0.0
    pts = np.concatenate([[0.0, end], traj.breakpoints(), dist.breakpoints()])
    return integrate(fun, pts[pts <= end], atol=atol)
