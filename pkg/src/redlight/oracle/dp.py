"""Grid dynamic programming over (time, speed, braking slack).

The state uses the slack ``s = d - x - b(t, v)``, where ``b`` is the least
distance the car still has to cover before ``q`` under full braking.  Full
braking keeps ``s`` constant and every other control decreases it, so
``s >= 0`` is exactly the feasible set and the table lives on a fixed box.
The value is linearly interpolated in speed and slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numba import njit
from numpy.polynomial.legendre import leggauss

from ..cost import expected_arrival
from ..distributions import ExponentialGreen
from ..kinematics import ProblemSpec, validate_problem
from ..report import InfeasibleProblem
from .profile import AccelProfile

__all__ = ["DPGrid", "DPResult", "dp_min_cost", "dp_horizon"]

_TAIL = 1e-9
_GL_NODES = 3
_SLACK_TOL = 1e-9


def dp_horizon(p: ProblemSpec) -> float:
    """Time span covered by the table.

    Bounded supports end at ``q``.  Otherwise the span runs until the
    remaining mass drops below ``1e-9`` plus the time to stop from ``v0``.
    """
    if math.isfinite(p.q):
        return p.q
    if isinstance(p.dist, ExponentialGreen):
        t_tail = math.log(1.0 / _TAIL) / p.dist.rate
    else:
        t_tail = p.dist.horizon
    return t_tail + p.v0 / p.beta


@dataclass(frozen=True)
class DPGrid:
    """Discretisation of the DP table.

    Parameters
    ----------
    dt : float
        Time step.
    dv : float
        Speed step; ``v_max / dv`` is rounded to the nearest integer.
    horizon : float
    accel_choices : sequence of float
        Admissible controls; must contain ``-beta``, 0 and ``alpha``.
    n_buckets : int
        Number of slack intervals over ``[0, s0]``.
    memory_budget : int
        Bytes allowed for the policy table.
    """

    dt: float
    dv: float
    horizon: float
    accel_choices: tuple
    n_buckets: int = 512
    memory_budget: int = 2 * 1024**3

    @classmethod
    def for_problem(
        cls,
        p: ProblemSpec,
        n_steps: int = 400,
        n_speeds: int = 200,
        n_buckets: int = 512,
        accel_choices: Optional[Sequence[float]] = None,
        memory_budget: int = 2 * 1024**3,
    ) -> "DPGrid":
        """Grid with ``dt = horizon / n_steps`` and ``dv = v_max / n_speeds``."""
        h = dp_horizon(p)
        if accel_choices is None:
            accel_choices = (-p.beta, 0.0, p.alpha)
        return cls(h / n_steps, p.v_max / n_speeds, h, tuple(float(a) for a in accel_choices), n_buckets, memory_budget)

    def refined(self, factor: int = 2) -> "DPGrid":
        """Grid with ``dt``, ``dv`` and the slack bucket width divided by ``factor``.

        Refining the slack axis along with time matters: interpolation error
        in slack accrues once per step, so halving ``dt`` alone doubles it.
        """
        return DPGrid(
            self.dt / factor, self.dv / factor, self.horizon, self.accel_choices, self.n_buckets * factor, self.memory_budget
        )

    def shape(self, v_max: float) -> tuple:
        return (self.n_steps, int(round(v_max / self.dv)) + 1, self.n_buckets + 1)

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.horizon / self.dt)))


@dataclass
class DPResult:
    """Outcome of :func:`dp_min_cost`.

    Attributes
    ----------
    cost : float
        Table value at the initial state.
    trace : AccelProfile
        Greedy forward simulation of the stored policy.
    trace_cost : float
        Exact expected arrival time of the trace.
    grid : DPGrid
    """

    cost: float
    trace: AccelProfile
    trace_cost: float
    grid: DPGrid
    info: dict = field(default_factory=dict)


@njit(cache=True, inline="always")
def _brake_reserve(t, v, q, beta):
    # least distance to cover before q when braking fully from speed v at time t
    left = q - t
    if v <= beta * left:
        return v * v / (2.0 * beta)
    return v * left - 0.5 * beta * left * left


@njit(cache=True, inline="always")
def _advance(v, a, tau, v_max):
    # speed and distance after tau under accel a, clamped to [0, v_max]
    if a > 0.0:
        t_hit = (v_max - v) / a
        v_end = v_max
    elif a < 0.0:
        t_hit = v / (-a)
        v_end = 0.0
    else:
        return v, v * tau
    if tau <= t_hit:
        return v + a * tau, tau * (v + 0.5 * a * tau)
    return v_end, t_hit * (v + 0.5 * a * t_hit) + v_end * (tau - t_hit)


_FAST = {"contract", "arcp", "reassoc", "nsz"}


@njit(cache=True, fastmath=_FAST, inline="always")
def _shifted_row(out, base, coef, ds, lo_row, hi_row, wv, kk, fr, n_s):
    # out[i] = base + coef*i*ds + interpolated next value at (v', s_i + shift)
    start = -kk
    for i in range(start):
        out[i] = np.inf
    stop = n_s if kk < 0 else n_s - 1
    for i in range(start, stop):
        idx = i + kk
        lo = lo_row[idx] + fr * (lo_row[idx + 1] - lo_row[idx])
        hi = hi_row[idx] + fr * (hi_row[idx + 1] - hi_row[idx])
        out[i] = base + coef * (i * ds) + lo + wv * (hi - lo)
    if kk == 0:
        last = n_s - 1
        out[last] = base + coef * (last * ds) + lo_row[last] + wv * (hi_row[last] - lo_row[last])


@njit(cache=True, fastmath=_FAST)
def _backward(
    n_steps, dt, vgrid, ds, n_s, accels, gl_x, gl_w, fnodes, alpha, beta, v_max, L, d, q, term_mass, term_time, policy, snap
):
    n_v = vgrid.size
    n_a = accels.size
    dv = vgrid[1] - vgrid[0]
    nxt = np.empty((n_v, n_s))
    cur = np.empty((n_v, n_s))
    cand = np.empty((n_a, n_s))
    # terminal layer: remaining mass brakes to rest
    for j in range(n_v):
        for i in range(n_s):
            x_stop = d - i * ds
            nxt[j, i] = term_mass * (term_time + v_max / (2.0 * alpha) + (L - x_stop) / v_max)
    two_av = 2.0 * alpha * v_max
    for n in range(n_steps - 1, -1, -1):
        t0 = n * dt
        t1 = t0 + dt
        wf = 0.0
        for g in range(gl_x.size):
            wf += gl_w[g] * dt * fnodes[n, g]
        coef = wf / v_max
        for j in range(n_v):
            v = vgrid[j]
            res0 = _brake_reserve(t0, v, q, beta)
            for k in range(n_a):
                a = accels[k]
                stage = 0.0
                for g in range(gl_x.size):
                    tau = gl_x[g] * dt
                    vg, xg = _advance(v, a, tau, v_max)
                    stage += gl_w[g] * dt * fnodes[n, g] * (
                        t0 + tau + (v_max - vg) * (v_max - vg) / two_av + (L - xg) / v_max
                    )
                v1, dx = _advance(v, a, dt, v_max)
                shift = res0 - dx - _brake_reserve(t1, v1, q, beta)
                # stage = const - x_n wf / v_max with x_n = d - s - res0
                base = stage - (d - res0) * coef
                pos_v = v1 / dv
                jv = int(pos_v)
                if jv >= n_v - 1:
                    jv = n_v - 2
                wv = pos_v - jv
                # braking keeps the slack; snap its rounding residue to zero
                if shift > 0.0 or -shift <= snap:
                    shift = 0.0
                rel = shift / ds
                kk = int(math.floor(rel))
                fr = rel - kk
                if fr > 1.0 - _SLACK_TOL * n_s:
                    kk += 1
                    fr = 0.0
                if kk == 0:
                    fr = 0.0
                if -kk >= n_s:
                    kk = -n_s
                _shifted_row(cand[k], base, coef, ds, nxt[jv], nxt[jv + 1], wv, kk, fr, n_s)
            for i in range(n_s):
                best = cand[0, i]
                arg = 0
                for k in range(1, n_a):
                    if cand[k, i] < best:
                        best = cand[k, i]
                        arg = k
                cur[j, i] = best
                policy[n, j, i] = arg
        tmp = nxt
        nxt = cur
        cur = tmp
    return nxt


def _bilinear(table, vgrid, ds, v, s):
    dv = vgrid[1] - vgrid[0]
    pv = min(v / dv, vgrid.size - 1 - 1e-12)
    j = int(pv)
    wv = pv - j
    ps = min(s / ds, table.shape[1] - 1 - 1e-12)
    i = int(ps)
    ws = ps - i
    row = lambda jj: (1 - ws) * table[jj, i] + ws * table[jj, min(i + 1, table.shape[1] - 1)]
    return (1 - wv) * row(j) + wv * row(min(j + 1, vgrid.size - 1))


def _reserve(t, v, q, beta):
    return float(_brake_reserve(t, v, q, beta))


def _trace(p, grid, policy, vgrid, ds, accels, q):
    n_steps = policy.shape[0]
    dt = grid.dt
    v = p.v0
    s = p.d - _reserve(0.0, v, q, p.beta)
    knots = [0.0]
    acc = []
    dv = vgrid[1] - vgrid[0]
    for n in range(n_steps):
        t0 = n * dt
        j = min(int(round(v / dv)), vgrid.size - 1)
        i = min(int(round(s / ds)), policy.shape[2] - 1)
        a = float(accels[policy[n, j, i]])
        v1, dx = _advance(v, a, dt, p.v_max)
        s1 = s + _reserve(t0, v, q, p.beta) - dx - _reserve(t0 + dt, v1, q, p.beta)
        if s1 < -_SLACK_TOL * max(1.0, p.d):
            a = -p.beta
            v1, dx = _advance(v, a, dt, p.v_max)
            s1 = s
        # split the step where the speed saturates
        if a > 0 and v + a * dt > p.v_max:
            th = (p.v_max - v) / a
            knots += [t0 + th, t0 + dt]
            acc += [a, 0.0]
        elif a < 0 and v + a * dt < 0:
            th = v / (-a)
            knots += [t0 + th, t0 + dt]
            acc += [a, 0.0]
        else:
            knots.append(t0 + dt)
            acc.append(a)
        v, s = v1, max(s1, 0.0)
    if not math.isfinite(q) and v > 0:
        knots.append(knots[-1] + v / p.beta)
        acc.append(-p.beta)
    return AccelProfile(knots, acc, p)


def dp_min_cost(p: ProblemSpec, grid: Optional[DPGrid] = None) -> DPResult:
    """Minimise the discretised expected arrival time by backward induction.

    Each step accrues the density-weighted ``t + k(x, v)`` over the step by
    3-point Gauss-Legendre on the exact constant-acceleration motion.

    Raises
    ------
    InfeasibleProblem
        For instances that fail validation.
    MemoryError
        When the policy table would exceed ``grid.memory_budget``.
    """
    val = validate_problem(p)
    if not val.ok:
        raise InfeasibleProblem(val.reasons)
    grid = DPGrid.for_problem(p) if grid is None else grid
    accels = np.array(sorted(set(grid.accel_choices)), dtype=float)
    for must in (-p.beta, 0.0, p.alpha):
        if not np.any(np.isclose(accels, must, rtol=0, atol=1e-12 * max(1.0, abs(must)))):
            raise ValueError("accel_choices must include -beta, 0 and alpha")
    if accels.min() < -p.beta - 1e-12 or accels.max() > p.alpha + 1e-12:
        raise ValueError("accel_choices must lie in [-beta, alpha]")
    n_steps, n_v, n_s = grid.shape(p.v_max)
    if n_steps * n_v * n_s > grid.memory_budget:
        raise MemoryError(f"policy table of {n_steps * n_v * n_s} bytes exceeds the budget")
    q = p.q if math.isfinite(p.q) else 1e300
    dt = grid.horizon / n_steps
    grid = DPGrid(dt, grid.dv, grid.horizon, grid.accel_choices, grid.n_buckets, grid.memory_budget)
    vgrid = np.linspace(0.0, p.v_max, n_v)
    s0 = p.d - _reserve(0.0, p.v0, q, p.beta)
    s_top = max(s0, 1e-9 * p.d)
    ds = s_top / grid.n_buckets
    x, w = leggauss(_GL_NODES)
    gl_x, gl_w = 0.5 * (x + 1.0), 0.5 * w
    times = (np.arange(n_steps)[:, None] + gl_x[None, :]) * dt
    fnodes = np.asarray(p.dist.pdf(times), dtype=float)
    H = n_steps * dt
    if math.isfinite(p.q):
        term_mass, term_time = 0.0, 0.0
    else:
        term_mass = float(1.0 - p.dist.cdf(H))
        term_time = H + 1.0 / p.dist.rate if isinstance(p.dist, ExponentialGreen) else H
    policy = np.zeros((n_steps, n_v, n_s), dtype=np.int8)
    v0_table = _backward(
        n_steps, dt, vgrid, ds, n_s, accels, gl_x, gl_w, fnodes,
        p.alpha, p.beta, p.v_max, p.L, p.d, q, term_mass, term_time, policy, _SLACK_TOL * max(1.0, p.d),
    )
    cost = float(_bilinear(v0_table, vgrid, ds, p.v0, s0))
    trace = _trace(p, grid, policy, vgrid, ds, accels, q)
    trace_cost = expected_arrival(trace, p)
    return DPResult(cost, trace, trace_cost, grid, {"shape": (n_steps, n_v, n_s)})
