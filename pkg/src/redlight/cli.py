"""Command-line entry point.

Exit status is 0 on success, 2 when the input is infeasible, trivial or
malformed (a JSON object with the reason is written to stdout), and 1 on an
internal error.  ``REDLIGHT_LOG`` selects the log level (error, info, debug).
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from .cost import expected_arrival, expected_arrival_mc
from .distributions import ExponentialGreen
from .io import SchemaError, dumps_csv, dumps_json, load_problem, load_trajectory
from .kinematics import validate_problem
from .oracle import DPGrid, dp_horizon, dp_min_cost, perturbation_test, sweep_switch_velocity
from .planner import classify, solve
from .report import InfeasibleProblem
from .solver_exponential import exp_state

__all__ = ["main", "build_parser"]

log = logging.getLogger("redlight")


class _Refusal(Exception):
    """Input the model rejects; carries a machine-readable reason list."""

    def __init__(self, status: str, reasons: Sequence[str], payload: Optional[dict] = None):
        self.status = status
        self.reasons = list(reasons)
        self.payload = payload or {}
        super().__init__(", ".join(self.reasons))


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _grid_spec(text: str) -> np.ndarray:
    try:
        lo, hi, n = text.split(":")
        n = int(n)
        if n < 1:
            raise ValueError
        return np.linspace(float(lo), float(hi), n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN:MAX:N, got {text!r}") from None


def _require_exponential(p, what: str) -> None:
    if not isinstance(p.dist, ExponentialGreen):
        raise _Refusal("unsupported", [f"{what}-needs-exponential-law"])


def _solve_or_refuse(p):
    try:
        rep = solve(p)
    except InfeasibleProblem as exc:
        raise _Refusal("infeasible", exc.reasons) from None
    return rep


def _report_dict(rep) -> dict:
    return {"status": "ok", "problem": rep.problem.to_dict(), **rep.to_dict()}


def cmd_solve(args) -> int:
    p = load_problem(args.problem)
    rep = _solve_or_refuse(p)
    body = _report_dict(rep)
    if rep.validation.trivial:
        # still emit the full-speed profile, but signal that the light is moot
        body["status"] = "trivial"
        body["reasons"] = list(rep.validation.reasons)
        log.error("trivial: %s", ", ".join(rep.validation.reasons))
    _emit(dumps_json(body), args.out)
    return 2 if rep.validation.trivial else 0


def cmd_evaluate(args) -> int:
    p = load_problem(args.problem)
    traj = load_trajectory(args.trajectory, p)
    body = {"status": "ok", "expected_arrival": expected_arrival(traj, p, atol=args.atol)}
    if args.mc:
        est = expected_arrival_mc(traj, p, n=args.mc, seed=args.seed)
        body["monte_carlo"] = {"mean": est.mean, "std_error": est.std_error, "n": args.mc, "seed": args.seed}
    _emit(dumps_json(body), args.out)
    return 0


def cmd_validate(args) -> int:
    p = load_problem(args.problem)
    val = validate_problem(p)
    body = {"status": "ok" if val.ok else ("trivial" if val.feasible and val.reasons == ["light-unreachable"] else "infeasible")}
    body.update(val.to_dict())
    if not val.ok:
        raise _Refusal(body["status"], val.reasons, body)
    _emit(dumps_json(body), args.out)
    return 0


def cmd_phase_diagram(args) -> int:
    p = load_problem(args.problem)
    state = exp_state(p) if isinstance(p.dist, ExponentialGreen) else None
    rows = []
    for v0 in args.v0:
        for d in args.d:
            if not (0.0 <= v0 <= p.v_max) or d <= 0:
                rows.append((float(v0), float(d), "out-of-range", math.nan))
                continue
            q = p.with_start(float(v0), float(d))
            try:
                label = classify(q, state).label
            except InfeasibleProblem:
                label = "infeasible"
            cost = math.nan
            if args.with_cost and label != "infeasible":
                try:
                    cost = solve(q, diagnostics=False).expected_arrival
                except InfeasibleProblem:
                    pass
            rows.append((float(v0), float(d), label, cost))
    header = ["v0", "d", "pattern"] + (["expected_arrival"] if args.with_cost else [])
    body = (r if args.with_cost else r[:3] for r in rows)
    _emit(dumps_csv(header, body), args.out)
    return 0


def cmd_sweep_vc(args) -> int:
    p = load_problem(args.problem)
    _require_exponential(p, "sweep")
    curve = sweep_switch_velocity(p, grid=args.points)
    _emit(dumps_csv(["v_c", "expected_arrival"], zip(curve.v_c, curve.cost)), args.out)
    return 0


def cmd_oracle(args) -> int:
    p = load_problem(args.problem)
    if args.oracle == "dp":
        validate = validate_problem(p)
        if not validate.feasible:
            raise _Refusal("infeasible", validate.reasons)
        h = dp_horizon(p)
        dt = args.dt if args.dt else h / 400
        dv = args.dv if args.dv else p.v_max / 200
        grid = DPGrid(dt, dv, h, (-p.beta, 0.0, p.alpha), args.buckets)
        res = dp_min_cost(p, grid)
        body = {
            "status": "ok",
            "oracle": "dp",
            "dp_cost": res.cost,
            "trace_cost": res.trace_cost,
            "trace_pattern": res.trace.pattern().label,
            "grid": {"dt": grid.dt, "dv": grid.dv, "horizon": grid.horizon, "buckets": grid.n_buckets},
        }
        if args.compare:
            rep = _solve_or_refuse(p)
            body["solver_cost"] = rep.expected_arrival
            body["relative_gap"] = (res.cost - rep.expected_arrival) / rep.expected_arrival
        if args.csv:
            t = res.trace.breakpoints()
            _emit(dumps_csv(["t", "v", "x"], zip(t, res.trace.velocity(t), res.trace.position(t))), args.csv)
        _emit(dumps_json(body), args.out)
        return 0
    if args.oracle == "sweep":
        _require_exponential(p, "sweep")
        curve = sweep_switch_velocity(p, grid=args.points)
        body = {
            "status": "ok",
            "oracle": "sweep",
            "argmin": curve.argmin,
            "min_cost": curve.min_cost,
            "step": curve.step,
            "v_c_star": exp_state(p).v_c_star,
        }
        if args.csv:
            _emit(dumps_csv(["v_c", "expected_arrival"], zip(curve.v_c, curve.cost)), args.csv)
        _emit(dumps_json(body), args.out)
        return 0
    traj = load_trajectory(args.trajectory, p) if args.trajectory else _solve_or_refuse(p).trajectory
    res = perturbation_test(traj, p, n=args.n, seed=args.seed)
    body = {
        "status": "ok",
        "oracle": "perturb",
        "n": int(res.deltas.size),
        "seed": args.seed,
        "min_delta": res.min_delta,
        "worst": res.worst,
        "resampled": res.resampled,
    }
    if args.csv:
        _emit(dumps_csv(["trial", "delta"], enumerate(res.deltas)), args.csv)
    _emit(dumps_json(body), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="redlight", description="Optimal approach to a red light of random duration.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--problem", required=True, metavar="FILE", help="problem JSON")
        sp.add_argument("--out", metavar="FILE", help="write output here instead of stdout")
        sp.set_defaults(func=func)
        return sp

    add("solve", cmd_solve, "optimal profile and report")
    sp = add("evaluate", cmd_evaluate, "expected arrival time of a given profile")
    sp.add_argument("--trajectory", required=True, metavar="FILE", help="trajectory JSON or solve report")
    sp.add_argument("--mc", type=int, default=0, metavar="N", help="also estimate by Monte Carlo with N draws")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--atol", type=float, default=1e-11, help="quadrature absolute tolerance")
    sp = add("phase-diagram", cmd_phase_diagram, "pattern map over a (v0, d) grid as CSV")
    sp.add_argument("--v0", type=_grid_spec, required=True, metavar="MIN:MAX:N")
    sp.add_argument("--d", type=_grid_spec, required=True, metavar="MIN:MAX:N")
    sp.add_argument("--with-cost", action="store_true", help="solve each cell and add its expected arrival")
    sp = add("sweep-vc", cmd_sweep_vc, "expected arrival against switch speed as CSV")
    sp.add_argument("--points", type=int, default=401)
    add("validate", cmd_validate, "feasibility and triviality check")

    op = sub.add_parser("oracle", help="independent optimality checks")
    osub = op.add_subparsers(dest="oracle", required=True)
    for name, help_text in (("dp", "grid dynamic programme"), ("sweep", "switch speed sweep"), ("perturb", "random perturbations")):
        sp = osub.add_parser(name, help=help_text)
        sp.add_argument("--problem", required=True, metavar="FILE")
        sp.add_argument("--out", metavar="FILE")
        sp.add_argument("--csv", metavar="FILE", help="also write the curve as CSV")
        sp.set_defaults(func=cmd_oracle)
        if name == "dp":
            sp.add_argument("--dt", type=float, help="time step, default horizon/400")
            sp.add_argument("--dv", type=float, help="speed step, default v_max/200")
            sp.add_argument("--buckets", type=int, default=512, help="distance buckets")
            sp.add_argument("--compare", action="store_true", help="also solve exactly and report the gap")
        elif name == "sweep":
            sp.add_argument("--points", type=int, default=401)
        else:
            sp.add_argument("--n", type=int, default=1000)
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--trajectory", metavar="FILE", help="profile to test, default the solver's")
    return parser


def _configure_logging() -> None:
    level = os.environ.get("REDLIGHT_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if level not in levels:
        log.error("unknown REDLIGHT_LOG=%r, using 'error'", level)


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    log.info("running %s", args.command)
    try:
        return args.func(args)
    except _Refusal as exc:
        body = {"status": exc.status, "reasons": exc.reasons}
        body.update({k: v for k, v in exc.payload.items() if k not in body})
        sys.stdout.write(dumps_json(body))
        log.error("%s: %s", exc.status, ", ".join(exc.reasons))
        return 2
    except SchemaError as exc:
        sys.stdout.write(dumps_json({"status": "schema-error", "reasons": ["schema"], "path": exc.path, "message": str(exc)}))
        log.error("schema error at %s", exc)
        return 2
    except OSError as exc:
        sys.stdout.write(dumps_json({"status": "io-error", "reasons": ["io"], "message": str(exc)}))
        log.error("%s", exc)
        return 2
    except Exception:  # noqa: BLE001
        log.exception("internal error")
        return 1


if __name__ == "__main__":
    sys.exit(main())
