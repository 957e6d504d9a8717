"""Problem instances, piecewise closed-form trajectories and their validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicHermiteSpline

from .distributions import ExcessGreen, ExponentialGreen, GreenDistribution, UniformGreen
from .quadrature import integrate

__all__ = [
    "ProblemSpec",
    "Segment",
    "Trajectory",
    "PhasePattern",
    "ValidationReport",
    "SEGMENT_KINDS",
    "ADMISSIBLE_ORDERS",
    "BOXED_ORDERS",
    "validate_problem",
    "full_speed_distance",
    "velocity_at",
    "position_at",
    "check_lipschitz",
    "build_trajectory",
]

SEGMENT_KINDS = ("alpha", "beta", "vmax", "zero", "el")

# orders of the positive-velocity phases an optimal profile may take
_PLAIN = {
    ("alpha",),
    ("alpha", "el"),
    ("alpha", "vmax", "el"),
    ("alpha", "vmax"),
    ("beta",),
    ("beta", "el"),
    ("vmax", "el"),
    ("vmax",),
    ("el",),
}
# orders that need an EL curve steeper than full braking somewhere
BOXED_ORDERS = frozenset(
    {
        ("alpha", "beta"),
        ("alpha", "el", "beta"),
        ("alpha", "vmax", "el", "beta"),
        ("alpha", "vmax", "beta"),
        ("beta", "el", "beta"),
        ("vmax", "el", "beta"),
        ("vmax", "beta"),
        ("el", "beta"),
    }
)
ADMISSIBLE_ORDERS = frozenset(_PLAIN) | BOXED_ORDERS

_LABELS = {"alpha": "alpha", "beta": "beta", "el": "EL", "vmax": "vmax"}
_FROM_LABEL = {v: k for k, v in _LABELS.items()}


@dataclass(frozen=True)
class ProblemSpec:
    """A complete red-light approach instance.

    Parameters
    ----------
    alpha : float
        Maximum acceleration.
    beta : float
        Maximum braking deceleration.
    v_max : float
        Speed limit.
    v0 : float
        Speed when the light is first seen, in ``[0, v_max]``.
    d : float
        Distance to the light.
    L : float
        Distance to the destination beyond the start point.
    dist : GreenDistribution
        Law of the remaining red time.
    """

    alpha: float
    beta: float
    v_max: float
    v0: float
    d: float
    L: float
    dist: GreenDistribution

    def __post_init__(self):
        for name in ("alpha", "beta", "v_max", "d", "L"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be finite and positive, got {val}")
        if not (math.isfinite(self.v0) and 0.0 <= self.v0 <= self.v_max):
            raise ValueError(f"v0 must lie in [0, v_max], got {self.v0}")
        if not isinstance(self.dist, GreenDistribution):
            raise TypeError("dist must be a GreenDistribution")

    def with_start(self, v0: float, d: float) -> "ProblemSpec":
        """Same physics and law, different initial speed and distance."""
        return ProblemSpec(self.alpha, self.beta, self.v_max, v0, d, self.L, self.dist)

    @property
    def q(self) -> float:
        return self.dist.q_support

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "v_max": self.v_max,
            "v0": self.v0,
            "d": self.d,
            "L": self.L,
            "distribution": self.dist.to_dict(),
        }


@dataclass(frozen=True)
class ValidationReport:
    """Feasibility verdict for a :class:`ProblemSpec`.

    Attributes
    ----------
    feasible : bool
        False iff the car cannot avoid passing the light while it is red.
    trivial : bool
        True iff the car cannot reach the light before ``q`` even at full
        speed, so the constraint is moot.
    reasons : list of str
        Name of each violated condition.
    """

    feasible: bool
    trivial: bool
    reasons: list

    @property
    def ok(self) -> bool:
        return not self.reasons

    def to_dict(self) -> dict:
        return {"feasible": self.feasible, "trivial": self.trivial, "reasons": list(self.reasons)}


def full_speed_distance(alpha: float, v_max: float, v0: float, q: float) -> float:
    """Distance covered by accelerating fully and then holding ``v_max`` until ``q``."""
    if not math.isfinite(q):
        return math.inf
    t_top = (v_max - v0) / alpha
    if q <= t_top:
        return q * (v0 + 0.5 * alpha * q)
    return (v_max - v0) * (v_max + v0) / (2 * alpha) + v_max * (q - t_top)


def min_stopping_distance(beta: float, v0: float, q: float) -> float:
    """Shortest distance covered before ``q`` under full braking."""
    if q >= v0 / beta:
        return v0 * v0 / (2 * beta)
    return q * (v0 - 0.5 * q * beta)


def validate_problem(p: ProblemSpec) -> ValidationReport:
    """Check the standing assumptions of the model.

    Reasons reported:

    ``stopping-infeasible``
        Full braking from ``v0`` still passes the light before ``q``.
    ``light-unreachable``
        Even full acceleration cannot reach the light before ``q``.
    ``destination-too-close``
        ``L < v_max**2 / (2 alpha)``.
    ``destination-before-light``
        ``L < d``.
    ``braking-weaker-than-acceleration``
        ``beta < alpha`` with a bounded support.
    """
    q = p.q
    reasons = []
    if p.d < min_stopping_distance(p.beta, p.v0, q):
        reasons.append("stopping-infeasible")
    trivial = math.isfinite(q) and p.d >= full_speed_distance(p.alpha, p.v_max, p.v0, q)
    if trivial:
        reasons.append("light-unreachable")
    if p.L < p.v_max**2 / (2 * p.alpha):
        reasons.append("destination-too-close")
    if p.L < p.d:
        reasons.append("destination-before-light")
    if math.isfinite(q) and p.beta < p.alpha:
        reasons.append("braking-weaker-than-acceleration")
    return ValidationReport("stopping-infeasible" not in reasons, trivial, reasons)


@dataclass(frozen=True)
class PhasePattern:
    """Ordered segment kinds of a trajectory's moving phases.

    Parameters
    ----------
    sequence : tuple of str
        Kinds drawn from ``alpha``, ``beta``, ``el`` and ``vmax``.
    trailing_zero : bool
        Whether the profile ends in standstill.
    """

    sequence: tuple
    trailing_zero: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sequence", tuple(self.sequence))
        bad = [k for k in self.sequence if k not in _LABELS]
        if bad:
            raise ValueError(f"unknown phase kinds {bad}")

    @property
    def admissible(self) -> bool:
        return self.sequence in ADMISSIBLE_ORDERS

    @property
    def boxed(self) -> bool:
        return self.sequence in BOXED_ORDERS

    @property
    def label(self) -> str:
        parts = [_LABELS[k] for k in self.sequence]
        if self.trailing_zero:
            parts.append("0")
        return ">".join(parts)

    @classmethod
    def from_label(cls, label: str) -> "PhasePattern":
        parts = [s for s in label.split(">") if s]
        zero = bool(parts) and parts[-1] == "0"
        if zero:
            parts = parts[:-1]
        return cls(tuple(_FROM_LABEL[s] for s in parts), zero)

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class Segment:
    """One closed-form piece of a velocity profile.

    Parameters
    ----------
    kind : {'alpha', 'beta', 'vmax', 'zero', 'el'}
    t_start : float
    duration : float
        ``math.inf`` is allowed only for a terminal hold.
    v_start : float
    """

    kind: str
    t_start: float
    duration: float
    v_start: float

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if not (self.duration >= 0):
            raise ValueError("segment duration must be non-negative")
        if math.isinf(self.duration) and self.kind not in ("zero", "vmax"):
            raise ValueError("only holds may last forever")

    @property
    def t_end(self) -> float:
        return self.t_start + self.duration

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "t_start": self.t_start,
            "duration": None if math.isinf(self.duration) else self.duration,
            "v_start": self.v_start,
        }


class _ExcessEL:
    """EL arc under a tabulated law, anchored at ``(t_start, v_start)``.

    Position is tabulated once on a fine grid and interpolated with cubic
    Hermite splines that use the exact velocity as derivative.
    """

    def __init__(self, seg: Segment, p: ProblemSpec, nodes: int = 2049):
        dist = p.dist
        t0 = seg.t_start
        self.t0 = t0
        self.offset = (p.v_max - seg.v_start) * float(dist.pdf(t0)) - p.alpha * float(dist.cdf(t0))
        self.p = p
        if seg.duration > 0:
            grid = np.unique(
                np.concatenate(
                    [np.linspace(t0, seg.t_end, nodes), dist.breakpoints()[(dist.breakpoints() > t0) & (dist.breakpoints() < seg.t_end)]]
                )
            )
            pieces = [integrate(self.abs_velocity, [a, b]) for a, b in zip(grid[:-1], grid[1:])]
            x = np.concatenate([[0.0], np.cumsum(pieces)])
            self.spline = CubicHermiteSpline(grid - t0, x, self.abs_velocity(grid))
        else:
            self.spline = None

    def abs_velocity(self, t):
        f = self.p.dist.pdf(t)
        F = self.p.dist.cdf(t)
        return self.p.v_max - (self.offset + self.p.alpha * F) / f

    def velocity(self, s):
        return self.abs_velocity(self.t0 + s)

    def position(self, s):
        if self.spline is None:
            return np.zeros_like(s)
        return self.spline(s)


class Trajectory:
    """Velocity profile made of contiguous closed-form segments.

    Parameters
    ----------
    segments : sequence of Segment
        Contiguous in time, starting at ``t = 0``.
    problem : ProblemSpec
        Instance whose physics and law define the EL segments.
    """

    def __init__(self, segments: Sequence[Segment], problem: ProblemSpec):
        segs = list(segments)
        if not segs:
            raise ValueError("a trajectory needs at least one segment")
        if abs(segs[0].t_start) > 1e-12:
            raise ValueError("trajectories start at t = 0")
        for prev, nxt in zip(segs[:-1], segs[1:]):
            if math.isinf(prev.duration):
                raise ValueError("only the last segment may be infinite")
            if abs(prev.t_end - nxt.t_start) > 1e-9 * max(1.0, abs(nxt.t_start)):
                raise ValueError("segments must be contiguous in time")
        self.segments = tuple(segs)
        self.problem = problem
        self._starts = np.array([s.t_start for s in segs])
        self._el = {}
        for i, s in enumerate(segs):
            if s.kind == "el" and isinstance(problem.dist, ExcessGreen):
                self._el[i] = _ExcessEL(s, problem)
        x = [0.0]
        for i, s in enumerate(segs[:-1]):
            x.append(x[-1] + float(self._seg_position(i, np.array([s.duration]))[0]))
        self._x0 = np.array(x)

    # -- per-segment closed forms -------------------------------------------------
    def _seg_velocity(self, i: int, s: NDArray) -> NDArray:
        seg = self.segments[i]
        p = self.problem
        v = seg.v_start
        if seg.kind == "alpha":
            return v + p.alpha * s
        if seg.kind == "beta":
            return v - p.beta * s
        if seg.kind in ("vmax", "zero"):
            return np.full_like(s, v)
        dist = p.dist
        if isinstance(dist, ExponentialGreen):
            lam = dist.rate
            A = p.v_max + p.alpha / lam
            return A - (A - v) * np.exp(lam * s)
        if isinstance(dist, UniformGreen):
            return v - p.alpha * s
        return self._el[i].velocity(s)

    def _seg_position(self, i: int, s: NDArray) -> NDArray:
        seg = self.segments[i]
        p = self.problem
        v = seg.v_start
        if seg.kind == "alpha":
            return s * (v + 0.5 * p.alpha * s)
        if seg.kind == "beta":
            return s * (v - 0.5 * p.beta * s)
        if seg.kind in ("vmax", "zero"):
            return v * s
        dist = p.dist
        if isinstance(dist, ExponentialGreen):
            lam = dist.rate
            A = p.v_max + p.alpha / lam
            return A * s - (A - v) * np.expm1(lam * s) / lam
        if isinstance(dist, UniformGreen):
            return s * (v - 0.5 * p.alpha * s)
        return self._el[i].position(s)

    def _locate(self, t):
        return np.clip(np.searchsorted(self._starts, t, side="right") - 1, 0, len(self.segments) - 1)

    # -- public evaluation --------------------------------------------------------
    @property
    def finite_end(self) -> float:
        """End of the last segment of finite duration."""
        last = self.segments[-1]
        return last.t_start if math.isinf(last.duration) else last.t_end

    @property
    def terminal_velocity(self) -> float:
        last = self.segments[-1]
        if math.isinf(last.duration):
            return last.v_start
        return float(self._seg_velocity(len(self.segments) - 1, np.array([last.duration]))[0])

    @property
    def stop_time(self) -> float:
        """Time the profile comes to rest for good, ``inf`` if it never does."""
        if self.terminal_velocity > 0:
            return math.inf
        end = self.finite_end
        for seg in reversed(self.segments):
            if seg.kind == "zero" or seg.duration == 0:
                end = seg.t_start
                continue
            break
        return end

    def velocity(self, t: ArrayLike) -> NDArray[np.float64]:
        """Speed at times ``t``; past the last finite segment, the terminal hold value."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        end = self.finite_end
        tail = t >= end
        out[tail] = self.terminal_velocity
        idx = self._locate(t)
        for i in np.unique(idx[~tail]):
            m = (idx == i) & ~tail
            out[m] = self._seg_velocity(int(i), t[m] - self.segments[i].t_start)
        return out

    def position(self, t: ArrayLike) -> NDArray[np.float64]:
        """Distance covered by times ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        end = self.finite_end
        tail = t >= end
        if np.any(tail):
            out[tail] = self.end_position + self.terminal_velocity * (t[tail] - end)
        idx = self._locate(t)
        for i in np.unique(idx[~tail]):
            m = (idx == i) & ~tail
            out[m] = self._x0[i] + self._seg_position(int(i), t[m] - self.segments[i].t_start)
        return out

    @property
    def end_position(self) -> float:
        """Position at the end of the last finite segment."""
        n = len(self.segments) - 1
        last = self.segments[-1]
        if math.isinf(last.duration):
            return float(self._x0[n])
        return float(self._x0[n] + self._seg_position(n, np.array([last.duration]))[0])

    def breakpoints(self) -> NDArray[np.float64]:
        """Segment boundaries up to the end of the finite part."""
        pts = [s.t_start for s in self.segments] + [self.finite_end]
        return np.unique(np.asarray(pts, dtype=float))

    def continuity_gap(self) -> float:
        """Largest velocity jump between consecutive segments."""
        gap = 0.0
        for i, (a, b) in enumerate(zip(self.segments[:-1], self.segments[1:])):
            end = float(self._seg_velocity(i, np.array([a.duration]))[0])
            gap = max(gap, abs(end - b.v_start))
        return gap

    def pattern(self, tol: float = 1e-12) -> PhasePattern:
        """Phase pattern after dropping segments shorter than ``tol``."""
        seq = []
        zero = False
        for seg in self.segments:
            if seg.duration < tol:
                continue
            if seg.kind == "zero":
                zero = True
                continue
            if not seq or seq[-1] != seg.kind:
                seq.append(seg.kind)
        if not zero and self.terminal_velocity == 0 and math.isinf(self.problem.q):
            zero = True
        return PhasePattern(tuple(seq), zero)

    def sample(self, step: float, t_end: float | None = None) -> NDArray[np.float64]:
        """Rows ``(t, v, x)`` on a regular grid, for CSV export."""
        if t_end is None:
            t_end = min(self.problem.q, max(self.finite_end, step))
        n = int(math.floor(t_end / step + 1e-9)) + 1
        t = np.arange(n) * step
        return np.column_stack([t, self.velocity(t), self.position(t)])

    def to_dict(self) -> dict:
        return {"segments": [s.to_dict() for s in self.segments]}

    @classmethod
    def from_dict(cls, data: dict, problem: ProblemSpec) -> "Trajectory":
        segs = []
        for row in data["segments"]:
            dur = row["duration"]
            segs.append(
                Segment(row["kind"], float(row["t_start"]), math.inf if dur is None else float(dur), float(row["v_start"]))
            )
        return cls(segs, problem)

    def __repr__(self) -> str:
        body = ", ".join(f"{s.kind}[{s.t_start:.4g}+{s.duration:.4g}]" for s in self.segments)
        return f"Trajectory({body})"


def build_trajectory(
    problem: ProblemSpec,
    pieces: Iterable[tuple],
    min_duration: float = 1e-12,
) -> Trajectory:
    """Chain segments from ``(kind, duration)`` pairs starting at ``v0``.

    Start speeds are propagated from the previous segment's closed-form end
    speed.  A ``None`` duration on a ``beta`` piece means "brake to rest".
    Pieces shorter than ``min_duration`` are dropped, except an infinite
    terminal hold.
    """
    segs: list[Segment] = []
    t, v = 0.0, problem.v0
    for kind, duration in pieces:
        if kind == "beta" and duration is None:
            duration = max(v, 0.0) / problem.beta
        if duration < min_duration:
            continue
        if kind == "zero":
            v = 0.0
        seg = Segment(kind, t, float(duration), float(min(max(v, 0.0), problem.v_max)))
        segs.append(seg)
        if math.isinf(duration):
            break
        v = _end_speed(seg, problem)
        t = seg.t_end
    if not segs:
        segs.append(Segment("zero" if problem.v0 == 0 else "vmax", 0.0, 0.0, problem.v0))
    return Trajectory(segs, problem)


def _end_speed(seg: Segment, p: ProblemSpec) -> float:
    s = seg.duration
    if seg.kind == "alpha":
        return seg.v_start + p.alpha * s
    if seg.kind == "beta":
        return seg.v_start - p.beta * s
    if seg.kind in ("vmax", "zero"):
        return seg.v_start
    dist = p.dist
    if isinstance(dist, ExponentialGreen):
        A = p.v_max + p.alpha / dist.rate
        return A - (A - seg.v_start) * math.exp(dist.rate * s)
    if isinstance(dist, UniformGreen):
        return seg.v_start - p.alpha * s
    t0, t1 = seg.t_start, seg.t_end
    offset = (p.v_max - seg.v_start) * float(dist.pdf(t0)) - p.alpha * float(dist.cdf(t0))
    return p.v_max - (offset + p.alpha * float(dist.cdf(t1))) / float(dist.pdf(t1))


def velocity_at(traj: Trajectory, t):
    """Speed of ``traj`` at time(s) ``t``."""
    out = traj.velocity(t)
    return float(out[0]) if np.ndim(t) == 0 else out


def position_at(traj: Trajectory, t):
    """Position of ``traj`` at time(s) ``t``."""
    out = traj.position(t)
    return float(out[0]) if np.ndim(t) == 0 else out


def check_lipschitz(traj: Trajectory, samples: int = 20_001) -> float:
    """Largest breach of the ``[-beta, alpha]`` slope cone over sampled pairs.

    Consecutive pairs of a grid that also contains every segment boundary are
    compared; for a piecewise-smooth profile this bounds every pair.  Speed
    increments within floating-point rounding of the cone count as inside.
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    p = traj.problem
    end = traj.finite_end
    stop = end if end > 0 else 1.0
    if math.isfinite(p.q):
        stop = max(stop, p.q)
    grid = np.linspace(0.0, stop * 1.05, samples)
    bps = traj.breakpoints()
    # keep pairs well separated so rounding in v is not amplified by tiny steps
    gap = 0.25 * (grid[1] - grid[0])
    near = np.min(np.abs(grid[:, None] - bps[None, :]), axis=1) < gap
    t = np.unique(np.concatenate([grid[~near], bps]))
    v = traj.velocity(t)
    dv = np.diff(v)
    dt = np.diff(t)
    # speeds carry rounding of order eps * (v_max + accel * t); excuse that much per increment
    slack = 16.0 * np.finfo(float).eps * (p.v_max + max(p.alpha, p.beta) * t[-1])
    over = np.maximum(dv - p.alpha * dt - slack, 0.0) / dt
    under = np.maximum(-p.beta * dt - dv - slack, 0.0) / dt
    return float(max(over.max(initial=0.0), under.max(initial=0.0)))
