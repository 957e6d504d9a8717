"""Euler-Lagrange isobars: the curves along which the pressure field is constant.

For a density ``f`` with CDF ``F`` the family is
``v(t) = v_max - (B + alpha F(t)) / f(t)``.  Two families have closed forms:
the exponential law gives ``v(t) = A - b exp(rate t)`` with
``A = v_max + alpha / rate`` and the uniform law gives straight lines of
slope ``-alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .distributions import ExponentialGreen, GreenDistribution, UniformGreen
from .kinematics import ProblemSpec

__all__ = [
    "ELCurve",
    "el_velocity",
    "el_slope",
    "el_ode_residual",
    "v_beta",
    "asymptote",
    "el_distance",
    "el_duration",
    "el_translation_check",
]


@dataclass(frozen=True)
class ELCurve:
    """One member of the isobar family.

    Parameters
    ----------
    dist : GreenDistribution
    B : float
        Pressure offset labelling the curve.
    alpha, v_max : float

    Notes
    -----
    For the exponential law the curve is evaluated through the coefficient
    ``b = (B + alpha) / rate``, which stays well conditioned for large ``t``.
    """

    dist: GreenDistribution
    B: float
    alpha: float
    v_max: float

    @classmethod
    def exponential(cls, b: float, alpha: float, v_max: float, rate: float) -> "ELCurve":
        """Curve ``A - b exp(rate t)`` given its coefficient ``b``."""
        return cls(ExponentialGreen(rate), rate * b - alpha, alpha, v_max)

    @classmethod
    def through(cls, dist: GreenDistribution, alpha: float, v_max: float, t: float, v: float) -> "ELCurve":
        """The curve passing through speed ``v`` at time ``t``."""
        B = (v_max - v) * float(dist.pdf(t)) - alpha * float(dist.cdf(t))
        return cls(dist, B, alpha, v_max)

    @property
    def b(self) -> float:
        if not isinstance(self.dist, ExponentialGreen):
            raise TypeError("coefficient b is defined for the exponential law only")
        return (self.B + self.alpha) / self.dist.rate


def asymptote(alpha: float, v_max: float, rate: float) -> float:
    """``A = v_max + alpha / rate``, the speed EL curves tend to as ``t -> -inf``."""
    return v_max + alpha / rate


def el_velocity(curve: ELCurve, t: ArrayLike):
    """Speed on ``curve`` at time ``t``."""
    t = np.asarray(t, dtype=float)
    dist = curve.dist
    if isinstance(dist, ExponentialGreen):
        out = asymptote(curve.alpha, curve.v_max, dist.rate) - curve.b * np.exp(dist.rate * t)
    elif isinstance(dist, UniformGreen):
        out = curve.v_max - curve.alpha * t - dist.q * curve.B
    else:
        out = curve.v_max - (curve.B + curve.alpha * dist.cdf(t)) / dist.pdf(t)
    return float(out) if out.ndim == 0 else out


def el_slope(curve: ELCurve, t: ArrayLike):
    """Time derivative of the speed on ``curve``."""
    t = np.asarray(t, dtype=float)
    dist = curve.dist
    if isinstance(dist, ExponentialGreen):
        out = -dist.rate * curve.b * np.exp(dist.rate * t)
    elif isinstance(dist, UniformGreen):
        out = np.full_like(t, -curve.alpha)
    else:
        f = dist.pdf(t)
        out = -curve.alpha + (curve.B + curve.alpha * dist.cdf(t)) * dist.dlogpdf(t) / f
    return float(out) if out.ndim == 0 else out


def el_ode_residual(curve: ELCurve, dist: GreenDistribution, t: ArrayLike):
    """Residual of ``v' + (log f)' (v - v_max) + alpha`` along ``curve``.

    The slope is analytic; ``(log f)'`` is analytic for the closed-form laws
    and a central difference for tabulated ones.
    """
    t = np.asarray(t, dtype=float)
    out = el_slope(curve, t) + dist.dlogpdf(t) * (el_velocity(curve, t) - curve.v_max) + curve.alpha
    return float(out) if np.ndim(out) == 0 else out


def v_beta(p: ProblemSpec) -> float:
    """Speed at which an exponential EL curve's slope equals ``-beta``.

    Raises
    ------
    TypeError
        For non-exponential laws, whose EL slope never needs this cut-off.
    """
    if not isinstance(p.dist, ExponentialGreen):
        raise TypeError("v_beta is defined for the exponential law only")
    return p.v_max + (p.alpha - p.beta) / p.dist.rate


def el_duration(v_hi: float, v_lo: float, rate: float, A: float) -> float:
    """Time an exponential EL curve takes to fall from ``v_hi`` to ``v_lo``."""
    if v_hi >= A:
        raise ValueError("v_hi must lie below the asymptote A")
    return math.log1p((v_hi - v_lo) / (A - v_hi)) / rate


def el_distance(v_hi: float, v_lo: float, rate: float, A: float) -> float:
    """Distance covered descending an exponential EL curve from ``v_hi`` to ``v_lo``.

    Equals ``(A/rate) ln((A - v_lo)/(A - v_hi)) - (v_hi - v_lo)/rate``,
    evaluated with ``log1p`` to stay accurate when the speeds are close.
    """
    if v_hi >= A:
        raise ValueError("v_hi must lie below the asymptote A")
    gap = v_hi - v_lo
    return (A * math.log1p(gap / (A - v_hi)) - gap) / rate


def el_translation_check(
    dist: GreenDistribution,
    B1: float,
    B2: float,
    t_grid: ArrayLike,
    alpha: float,
    v_max: float,
) -> tuple[float, float]:
    """Verify that two isobars are time shifts of each other.

    Returns
    -------
    shift : float
        ``Delta`` with ``v_B2(t) = v_B1(t + Delta)``.
    deviation : float
        Max absolute difference over ``t_grid``.
    """
    t = np.asarray(t_grid, dtype=float)
    c1 = ELCurve(dist, B1, alpha, v_max)
    c2 = ELCurve(dist, B2, alpha, v_max)
    if isinstance(dist, ExponentialGreen):
        shift = math.log(c2.b / c1.b) / dist.rate
    elif isinstance(dist, UniformGreen):
        shift = dist.q * (B2 - B1) / alpha
    else:
        raise TypeError("translation check needs a uniform or exponential law")
    dev = np.max(np.abs(el_velocity(c2, t) - el_velocity(c1, t + shift)), initial=0.0)
    return shift, float(dev)
