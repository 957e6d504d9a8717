"""Independent checks of solver output: grid DP, switch sweeps and perturbations."""

from .dp import DPGrid, DPResult, dp_horizon, dp_min_cost
from .perturb import Perturbation, PerturbationResult, Tent, perturbation_delta, perturbation_test
from .profile import AccelProfile
from .sweep import SweepCurve, sweep_switch_velocity

__all__ = [
    "DPGrid",
    "DPResult",
    "dp_horizon",
    "dp_min_cost",
    "AccelProfile",
    "Tent",
    "Perturbation",
    "PerturbationResult",
    "perturbation_delta",
    "perturbation_test",
    "SweepCurve",
    "sweep_switch_velocity",
]
