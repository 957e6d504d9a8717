"""Solver output and the shared failure type."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .kinematics import PhasePattern, ProblemSpec, Trajectory, ValidationReport, check_lipschitz

__all__ = ["SolveReport", "InfeasibleProblem", "trajectory_diagnostics"]


class InfeasibleProblem(ValueError):
    """Raised when an instance violates the model's standing assumptions."""

    def __init__(self, reasons):
        self.reasons = list(reasons)
        super().__init__(", ".join(self.reasons))


def trajectory_diagnostics(traj: Trajectory, lipschitz_samples: int = 20_001) -> dict:
    """Continuity, slope-cone and distance audit of a solved profile."""
    p = traj.problem
    end = p.q if math.isfinite(p.q) else traj.stop_time
    if not math.isfinite(end):
        end = traj.finite_end
    travelled = float(traj.position(end)[0])
    t = np.linspace(0.0, max(traj.finite_end, 1e-9), 2001)
    v = traj.velocity(t)
    return {
        "distance": travelled,
        "distance_error": travelled - p.d,
        "continuity_gap": traj.continuity_gap(),
        "lipschitz_violation": check_lipschitz(traj, lipschitz_samples),
        "speed_range_violation": float(max(0.0, -v.min(), v.max() - p.v_max)),
    }


@dataclass
class SolveReport:
    """Optimal profile and the quantities that characterise it.

    Attributes
    ----------
    pattern : PhasePattern
    trajectory : Trajectory
    expected_arrival : float
    transition_times, transition_velocities : list of float
        Segment boundaries and the speed there.
    validation : ValidationReport
    v_c_star, v_beta, A : float or None
        Exponential law only: switch speed to full braking, speed where the
        EL slope equals ``-beta``, and the EL asymptote.
    exceeds_vmax : bool or None
        Whether the switch speed lies at or above ``v_max``.
    level : float or None
        Uniform law only: intercept of the filling level line.
    regime : str or None
    diagnostics : dict
    """

    pattern: PhasePattern
    trajectory: Trajectory
    expected_arrival: float
    transition_times: list
    transition_velocities: list
    validation: ValidationReport
    v_c_star: Optional[float] = None
    v_beta: Optional[float] = None
    A: Optional[float] = None
    exceeds_vmax: Optional[bool] = None
    level: Optional[float] = None
    regime: Optional[str] = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def problem(self) -> ProblemSpec:
        return self.trajectory.problem

    def to_dict(self) -> dict:
        return {
            "pattern": self.pattern.label,
            "expected_arrival": self.expected_arrival,
            "transition_times": list(self.transition_times),
            "transition_velocities": list(self.transition_velocities),
            "validation": self.validation.to_dict(),
            "v_c_star": self.v_c_star,
            "v_beta": self.v_beta,
            "A": self.A,
            "exceeds_vmax": self.exceeds_vmax,
            "level": self.level,
            "regime": self.regime,
            "diagnostics": dict(self.diagnostics),
            "trajectory": self.trajectory.to_dict(),
        }


def transitions(traj: Trajectory) -> tuple[list, list]:
    times, speeds = [], []
    for seg in traj.segments[1:]:
        times.append(seg.t_start)
        speeds.append(seg.v_start)
    return times, speeds
