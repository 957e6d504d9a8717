"""Laws for the remaining red time ``T``.

Three families are supported: ``Uniform(0, q)``, ``Exponential(rate)`` and
the stationary excess (residual life) of a renewal process built from a
tabulated interarrival CDF.  Every distribution exposes a density, a CDF,
its support endpoint and an inverse CDF for sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "GreenDistribution",
    "UniformGreen",
    "ExponentialGreen",
    "ExcessGreen",
    "DensityReport",
    "excess_from_interarrival",
    "pdf",
    "cdf",
    "validate_density",
]

# 1 - F(t) < 1e-12 for the exponential law beyond this many mean lifetimes
_EXP_HORIZON_MEANS = 28.0


class GreenDistribution:
    """Common interface for the law of the remaining red time.

    Attributes
    ----------
    q_support : float
        Right end of the support, ``math.inf`` when unbounded.
    density_bound : float
        Upper bound ``K`` on the density (attained at ``t = 0``).
    """

    kind: str = ""

    @property
    def q_support(self) -> float:
        raise NotImplementedError

    @property
    def density_bound(self) -> float:
        raise NotImplementedError

    @property
    def horizon(self) -> float:
        """Finite time beyond which the remaining mass is negligible."""
        return self.q_support

    def pdf(self, t: ArrayLike) -> NDArray[np.float64]:
        raise NotImplementedError

    def cdf(self, t: ArrayLike) -> NDArray[np.float64]:
        raise NotImplementedError

    def ppf(self, u: ArrayLike) -> NDArray[np.float64]:
        """Inverse CDF, used for sampling."""
        raise NotImplementedError

    def dlogpdf(self, t: ArrayLike) -> NDArray[np.float64]:
        """Derivative of ``log f`` with respect to time."""
        t = np.asarray(t, dtype=float)
        h = 1e-5 * np.maximum(1.0, t)
        lo = np.maximum(t - h, 0.0)
        hi = t + h
        return (np.log(self.pdf(hi)) - np.log(self.pdf(lo))) / (hi - lo)

    def breakpoints(self) -> NDArray[np.float64]:
        """Times inside the support where the density has a kink."""
        return np.empty(0)

    def mean(self) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformGreen(GreenDistribution):
    """``T ~ Uniform(0, q)``."""

    q: float
    kind: str = field(default="uniform", init=False)

    def __post_init__(self):
        if not (math.isfinite(self.q) and self.q > 0):
            raise ValueError(f"uniform support q must be finite and positive, got {self.q}")

    @property
    def q_support(self) -> float:
        return float(self.q)

    @property
    def density_bound(self) -> float:
        return 1.0 / self.q

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where((t >= 0) & (t < self.q), 1.0 / self.q, 0.0)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.clip(t / self.q, 0.0, 1.0)

    def ppf(self, u):
        return self.q * np.asarray(u, dtype=float)

    def dlogpdf(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def mean(self) -> float:
        return 0.5 * self.q

    def to_dict(self) -> dict:
        return {"kind": "uniform", "q": float(self.q)}


@dataclass(frozen=True)
class ExponentialGreen(GreenDistribution):
    """``T ~ Exponential(rate)``, memoryless with unbounded support."""

    rate: float
    kind: str = field(default="exponential", init=False)

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ValueError(f"exponential rate must be finite and positive, got {self.rate}")

    @property
    def q_support(self) -> float:
        return math.inf

    @property
    def density_bound(self) -> float:
        return float(self.rate)

    @property
    def horizon(self) -> float:
        return _EXP_HORIZON_MEANS / self.rate

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, self.rate * np.exp(-self.rate * np.maximum(t, 0.0)), 0.0)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return -np.expm1(-self.rate * np.maximum(t, 0.0))

    def sf(self, t):
        """Survival function ``1 - F``, accurate in the far tail."""
        return np.exp(-self.rate * np.maximum(np.asarray(t, dtype=float), 0.0))

    def ppf(self, u):
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def dlogpdf(self, t):
        return np.full_like(np.asarray(t, dtype=float), -self.rate)

    def mean(self) -> float:
        return 1.0 / self.rate

    def to_dict(self) -> dict:
        return {"kind": "exponential", "lambda": float(self.rate)}


@dataclass(frozen=True, eq=False)
class ExcessGreen(GreenDistribution):
    """Residual red time of a stationary renewal process.

    The density is ``(1 - Theta(t)) / mean`` with ``Theta`` linearly
    interpolated between knots, so it is piecewise linear and the CDF is
    piecewise quadratic.  Both are divided by the total mass of the table so
    that ``F(q) = 1`` exactly even when the table truncates a long tail.

    Parameters
    ----------
    knots : ndarray of shape (n, 2)
        Rows ``(x, Theta(x))`` with non-decreasing ``x`` and ``Theta``.
    interarrival_mean : float
        Mean of the interarrival law.
    """

    knots: NDArray[np.float64]
    interarrival_mean: float
    kind: str = field(default="excess", init=False)
    _x: NDArray[np.float64] = field(init=False, repr=False)
    _f: NDArray[np.float64] = field(init=False, repr=False)
    _F: NDArray[np.float64] = field(init=False, repr=False)
    _q: float = field(init=False, repr=False)
    mass: float = field(init=False)

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        if knots.ndim != 2 or knots.shape[1] != 2 or knots.shape[0] < 2:
            raise ValueError("cdf knots must be an (n >= 2, 2) table of (x, Theta)")
        if not np.all(np.isfinite(knots)):
            raise ValueError("cdf knots must be finite")
        if not (math.isfinite(self.interarrival_mean) and self.interarrival_mean > 0):
            raise ValueError(f"mean must be finite and positive, got {self.interarrival_mean}")
        x, theta = knots[:, 0], knots[:, 1]
        if x[0] != 0.0:
            raise ValueError("cdf knots must start at x = 0")
        if np.any(np.diff(x) < 0):
            raise ValueError("cdf knot abscissae must be non-decreasing")
        if np.any(np.diff(theta) < 0):
            raise ValueError("cdf values must be non-decreasing")
        if theta[0] < 0 or theta[-1] > 1:
            raise ValueError("cdf values must lie in [0, 1]")
        full = np.flatnonzero(theta >= 1.0)
        stop = int(full[0]) if full.size else len(x) - 1
        x = x[: stop + 1]
        f = (1.0 - theta[: stop + 1]) / self.interarrival_mean
        # piecewise-linear density: trapezoids integrate it exactly
        F = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(x) * (f[:-1] + f[1:]))])
        mass = F[-1]
        if not mass > 0:
            raise ValueError("table carries no probability mass")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "_x", x)
        object.__setattr__(self, "_f", f / mass)
        object.__setattr__(self, "_F", F / mass)
        object.__setattr__(self, "_q", float(x[-1]))
        object.__setattr__(self, "mass", float(mass))

    @property
    def q_support(self) -> float:
        return self._q

    @property
    def density_bound(self) -> float:
        return float(self._f[0])

    def _locate(self, t):
        # right-continuous lookup so vertical jumps in Theta resolve to the right limit
        i = np.searchsorted(self._x, t, side="right") - 1
        return np.clip(i, 0, len(self._x) - 2)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        i = self._locate(t)
        x0, x1 = self._x[i], self._x[i + 1]
        f0, f1 = self._f[i], self._f[i + 1]
        w = np.divide(t - x0, x1 - x0, out=np.zeros_like(t), where=x1 > x0)
        out = f0 + w * (f1 - f0)
        return np.where((t >= 0) & (t < self._q), out, 0.0)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, 0.0, self._q)
        i = self._locate(tc)
        s = tc - self._x[i]
        out = self._F[i] + 0.5 * s * (self._f[i] + self.pdf(tc))
        out = np.where(tc >= self._q, 1.0, out)
        return np.clip(out, 0.0, 1.0)

    def ppf(self, u):
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        i = np.clip(np.searchsorted(self._F, u, side="right") - 1, 0, len(self._x) - 2)
        h = self._x[i + 1] - self._x[i]
        f0 = self._f[i]
        g = np.divide(self._f[i + 1] - f0, h, out=np.zeros_like(h), where=h > 0)
        rem = u - self._F[i]
        disc = np.sqrt(np.maximum(f0 * f0 + 2.0 * g * rem, 0.0))
        denom = f0 + disc
        s = np.divide(2.0 * rem, denom, out=np.zeros_like(rem), where=denom > 0)
        return np.clip(self._x[i] + np.minimum(s, h), 0.0, self._q)

    def breakpoints(self):
        return np.unique(self._x[(self._x > 0) & (self._x < self._q)])

    def mean(self) -> float:
        # E[T] = int_0^q (1 - F); exact for the piecewise-quadratic CDF via Simpson
        x0, x1 = self._x[:-1], self._x[1:]
        mid = 0.5 * (x0 + x1)
        sf = lambda t: 1.0 - self.cdf(t)
        return float(np.sum((x1 - x0) / 6.0 * (sf(x0) + 4.0 * sf(mid) + sf(x1))))

    def to_dict(self) -> dict:
        return {
            "kind": "excess",
            "cdf_knots": [[float(a), float(b)] for a, b in self.knots],
            "mean": float(self.interarrival_mean),
        }


Distribution = Union[UniformGreen, ExponentialGreen, ExcessGreen]


def excess_from_interarrival(interarrival_cdf: ArrayLike, mean: float) -> ExcessGreen:
    """Build the residual-time law of a stationary renewal process.

    Parameters
    ----------
    interarrival_cdf : array_like of shape (n, 2)
        Tabulated interarrival CDF as rows ``(x, Theta(x))``.
    mean : float
        Mean interarrival time.

    Returns
    -------
    ExcessGreen

    Examples
    --------
    A red phase of fixed length 2 gives a uniform residual time:

    >>> dist = excess_from_interarrival([[0, 0], [2, 0], [2, 1]], mean=2.0)
    >>> float(dist.pdf(1.0))
    0.5
    """
    return ExcessGreen(np.asarray(interarrival_cdf, dtype=float), float(mean))


def pdf(dist: GreenDistribution, t: ArrayLike):
    """Density of ``T`` at ``t``; zero outside ``[0, q_support)``."""
    out = dist.pdf(t)
    return float(out) if np.ndim(out) == 0 else out


def cdf(dist: GreenDistribution, t: ArrayLike):
    """CDF of ``T`` at ``t``."""
    out = dist.cdf(t)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class DensityReport:
    """Outcome of :func:`validate_density`.

    Attributes
    ----------
    violations : list of (str, int, float)
        ``(check, grid index, amount)`` for each failed grid point.
    max_violation : float
        Largest violation amount, 0 when the density is admissible.
    """

    violations: list
    max_violation: float

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_density(dist: GreenDistribution, grid_points: int = 10_000) -> DensityReport:
    """Check positivity and monotone non-increase of the density on a grid.

    The grid covers ``[0, min(q_support, horizon))`` with the right end
    excluded.  Each failing grid index is reported; the check never raises.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    end = min(dist.q_support, dist.horizon)
    t = np.linspace(0.0, end, grid_points + 1)[:-1]
    f = np.asarray(dist.pdf(t), dtype=float)
    violations = []
    for i in np.flatnonzero(f <= 0):
        violations.append(("positive", int(i), float(-f[i])))
    rise = np.diff(f)
    # relative slack absorbs rounding in the closed forms
    tol = 1e-12 * np.maximum(np.abs(f[:-1]), 1e-300)
    for i in np.flatnonzero(rise > tol):
        violations.append(("non-increasing", int(i + 1), float(rise[i])))
    worst = max((v[2] for v in violations), default=0.0)
    return DensityReport(violations, worst)
