"""Optimal speed profiles for approaching a red light of random remaining duration."""

from .cost import MCEstimate, expected_arrival, expected_arrival_mc, k_remainder, pressure_action
from .distributions import ExcessGreen, ExponentialGreen, GreenDistribution, UniformGreen, excess_from_interarrival
from .io import SchemaError, load_problem, problem_from_dict
from .kinematics import PhasePattern, ProblemSpec, Segment, Trajectory, build_trajectory, validate_problem
from .planner import RedLightPlanner, classify, solve
from .report import InfeasibleProblem, SolveReport
from .solver_exponential import solve_exponential, solve_vc_star
from .solver_uniform import solve_uniform

__version__ = "0.1.0"

__all__ = [
    "MCEstimate",
    "expected_arrival",
    "expected_arrival_mc",
    "k_remainder",
    "pressure_action",
    "ExcessGreen",
    "ExponentialGreen",
    "GreenDistribution",
    "UniformGreen",
    "excess_from_interarrival",
    "SchemaError",
    "load_problem",
    "problem_from_dict",
    "PhasePattern",
    "ProblemSpec",
    "Segment",
    "Trajectory",
    "build_trajectory",
    "validate_problem",
    "RedLightPlanner",
    "classify",
    "solve",
    "InfeasibleProblem",
    "SolveReport",
    "solve_exponential",
    "solve_vc_star",
    "solve_uniform",
]
