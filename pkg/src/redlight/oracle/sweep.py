"""Cost of the EL-then-brake family as a function of the switch speed."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..cost import expected_arrival
from ..kinematics import PhasePattern, ProblemSpec
from ..solver_exponential import assemble_switch_family, exp_state

__all__ = ["SweepCurve", "sweep_switch_velocity"]


@dataclass(frozen=True)
class SweepCurve:
    """Expected arrival time over a grid of switch speeds.

    Attributes
    ----------
    v_c : ndarray
    cost : ndarray
        NaN where no family member switches at that speed.
    """

    v_c: np.ndarray
    cost: np.ndarray

    @property
    def argmin(self) -> float:
        return float(self.v_c[np.nanargmin(self.cost)])

    @property
    def min_cost(self) -> float:
        return float(np.nanmin(self.cost))

    @property
    def step(self) -> float:
        return float(self.v_c[1] - self.v_c[0]) if self.v_c.size > 1 else 0.0


def sweep_switch_velocity(
    p: ProblemSpec,
    family: Optional[PhasePattern] = None,
    grid: int = 401,
    lo: Optional[float] = None,
    hi: Optional[float] = None,
) -> SweepCurve:
    """Evaluate the family switching from an EL arc to braking at each grid speed.

    Parameters
    ----------
    p : ProblemSpec
        Exponential instance.
    family : PhasePattern, optional
        Restrict to members with this pattern; others are marked absent.
        A member whose EL arc has zero length counts as the family's limit.
    grid : int
        Number of switch speeds.
    lo, hi : float, optional
        Speed range, by default ``[max(v_beta, 0), v_max]``.
    """
    st = exp_state(p)
    lo = max(st.v_beta, 0.0) if lo is None else lo
    hi = p.v_max if hi is None else hi
    speeds = np.linspace(lo, hi, grid)
    costs = np.full(grid, np.nan)
    for i, v_c in enumerate(speeds):
        traj = assemble_switch_family(p, float(v_c), st)
        if traj is None:
            continue
        if family is not None:
            seq = traj.pattern().sequence
            if "el" not in seq and seq[-1:] == ("beta",):
                seq = seq[:-1] + ("el", "beta")
            if seq != family.sequence:
                continue
        costs[i] = expected_arrival(traj, p)
    return SweepCurve(speeds, costs)
