"""Law-agnostic entry points and a scikit-learn style estimator."""

from __future__ import annotations

import math
from typing import Optional, Union

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .distributions import ExponentialGreen, GreenDistribution, UniformGreen
from .kinematics import PhasePattern, ProblemSpec, validate_problem
from .report import InfeasibleProblem, SolveReport
from .solver_exponential import classify_region, exp_state, solve_exponential
from .solver_uniform import solve_uniform, uniform_phase_region

__all__ = ["solve", "classify", "RedLightPlanner"]


def solve(p: ProblemSpec, diagnostics: bool = True) -> SolveReport:
    """Optimal profile for ``p``, dispatched on the red-time law.

    Raises
    ------
    InfeasibleProblem
        When validation fails.
    NotImplementedError
        For laws without a closed-form solver.
    """
    if isinstance(p.dist, ExponentialGreen):
        return solve_exponential(p, diagnostics=diagnostics)
    if isinstance(p.dist, UniformGreen):
        return solve_uniform(p, diagnostics=diagnostics)
    raise NotImplementedError(f"no exact solver for the {p.dist.kind!r} law")


def classify(p: ProblemSpec, state=None) -> PhasePattern:
    """Optimal pattern from the region boundaries, without building the profile."""
    if isinstance(p.dist, ExponentialGreen):
        return classify_region(p.v0, p.d, exp_state(p) if state is None else state, p)
    if isinstance(p.dist, UniformGreen):
        return uniform_phase_region(p, p.v0, p.d)
    raise NotImplementedError(f"no phase classifier for the {p.dist.kind!r} law")


def _as_distribution(dist) -> GreenDistribution:
    if isinstance(dist, GreenDistribution):
        return dist
    if isinstance(dist, dict):
        from .io import distribution_from_dict

        return distribution_from_dict(dist)
    raise TypeError("distribution must be a GreenDistribution or its JSON dict")


class RedLightPlanner(BaseEstimator):
    """Batch planner over initial states ``(v0, d)`` for fixed vehicle physics.

    Parameters
    ----------
    alpha, beta, v_max : float
        Acceleration bound, braking bound and speed limit.
    L : float
        Distance to the destination.
    distribution : GreenDistribution or dict
        Red-time law, as an object or in the problem-file JSON form.

    Attributes
    ----------
    dist_ : GreenDistribution
    v_beta_, v_c_star_, A_ : float or None
        Exponential law only.
    regime_ : str
        ``'i'``, ``'ii'`` or ``'iii'`` for the exponential law, ``'tank'`` otherwise.

    Notes
    -----
    ``fit`` needs no data; ``X`` is accepted for pipeline compatibility.
    Rows of ``X`` are ``(v0, d)``.
    """

    def __init__(
        self,
        alpha: float = 1.0,
        beta: float = 1.0,
        v_max: float = 1.0,
        L: float = 1.0,
        distribution: Union[GreenDistribution, dict, None] = None,
    ):
        self.alpha = alpha
        self.beta = beta
        self.v_max = v_max
        self.L = L
        self.distribution = distribution

    def fit(self, X=None, y=None):
        if X is not None:
            check_array(X, ensure_min_features=2)
        if self.distribution is None:
            raise ValueError("distribution is required")
        self.dist_ = _as_distribution(self.distribution)
        # probe instance validates the physical parameters
        self._template = ProblemSpec(self.alpha, self.beta, self.v_max, 0.0, self.L, self.L, self.dist_)
        self.v_beta_ = self.v_c_star_ = self.A_ = None
        if isinstance(self.dist_, ExponentialGreen):
            self._state = exp_state(self._template)
            self.v_beta_ = self._state.v_beta
            self.v_c_star_ = self._state.v_c_star
            self.A_ = self._state.A
            self.regime_ = self._state.regime
        else:
            self._state = None
            self.regime_ = "tank"
        self.n_features_in_ = 2
        return self

    def _rows(self, X):
        check_is_fitted(self, "dist_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 2:
            raise ValueError(f"X must have 2 columns (v0, d), got {X.shape[1]}")
        return X

    def problem(self, v0: float, d: float) -> ProblemSpec:
        check_is_fitted(self, "dist_")
        return self._template.with_start(float(v0), float(d))

    def solve_one(self, v0: float, d: float) -> SolveReport:
        return solve(self.problem(v0, d))

    def predict(self, X) -> np.ndarray:
        """Pattern label per row; ``'infeasible'`` where no safe profile exists."""
        X = self._rows(X)
        out = np.empty(X.shape[0], dtype=object)
        for i, (v0, d) in enumerate(X):
            try:
                p = self.problem(v0, d)
                out[i] = classify(p, self._state).label
            except (InfeasibleProblem, ValueError):
                out[i] = "infeasible"
        return out

    def transform(self, X) -> np.ndarray:
        """Optimal expected arrival time per row, ``nan`` where infeasible."""
        X = self._rows(X)
        out = np.full((X.shape[0], 1), math.nan)
        for i, (v0, d) in enumerate(X):
            try:
                out[i, 0] = self.solve_one(v0, d).expected_arrival
            except (InfeasibleProblem, ValueError):
                pass
        return out

    def score(self, X, y=None) -> float:
        """Negative mean expected arrival over the feasible rows."""
        vals = self.transform(X)[:, 0]
        return -float(np.nanmean(vals))

    def validate(self, v0: float, d: float):
        return validate_problem(self.problem(v0, d))
