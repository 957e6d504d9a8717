"""Problem and trajectory files: strict JSON schemas, parsing and emission."""

from __future__ import annotations

import csv
import io as _io
import json
import math
from typing import Any, Iterable, Sequence

import jsonschema
import numpy as np

from .distributions import ExcessGreen, ExponentialGreen, GreenDistribution, UniformGreen
from .kinematics import SEGMENT_KINDS, ProblemSpec, Trajectory

__all__ = [
    "SchemaError",
    "PROBLEM_SCHEMA",
    "TRAJECTORY_SCHEMA",
    "distribution_from_dict",
    "problem_from_dict",
    "load_problem",
    "trajectory_from_json",
    "load_trajectory",
    "to_jsonable",
    "dumps_json",
    "dumps_csv",
]

_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}

_DIST_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"kind": {"const": "uniform"}, "q": _POS},
            "required": ["kind", "q"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"kind": {"const": "exponential"}, "lambda": _POS},
            "required": ["kind", "lambda"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "kind": {"const": "excess"},
                "cdf_knots": {
                    "type": "array",
                    "minItems": 2,
                    "items": {"type": "array", "items": _NONNEG, "minItems": 2, "maxItems": 2},
                },
                "mean": _POS,
            },
            "required": ["kind", "cdf_knots", "mean"],
            "additionalProperties": False,
        },
    ]
}

PROBLEM_SCHEMA = {
    "type": "object",
    "properties": {
        "alpha": _POS,
        "beta": _POS,
        "v_max": _POS,
        "v0": _NONNEG,
        "d": _POS,
        "L": _POS,
        "distribution": _DIST_SCHEMA,
    },
    "required": ["alpha", "beta", "v_max", "v0", "d", "L", "distribution"],
    "additionalProperties": False,
}

_SEGMENT_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": list(SEGMENT_KINDS)},
        "t_start": _NONNEG,
        "duration": {"oneOf": [_NONNEG, {"type": "null"}]},
        "v_start": _NONNEG,
    },
    "required": ["kind", "t_start", "duration", "v_start"],
    "additionalProperties": False,
}

TRAJECTORY_SCHEMA = {
    "type": "object",
    "properties": {"segments": {"type": "array", "minItems": 1, "items": _SEGMENT_SCHEMA}},
    "required": ["segments"],
    "additionalProperties": False,
}

_REPORT_KEYS = {
    "status",
    "problem",
    "pattern",
    "expected_arrival",
    "transition_times",
    "transition_velocities",
    "validation",
    "v_c_star",
    "v_beta",
    "A",
    "exceeds_vmax",
    "level",
    "regime",
    "diagnostics",
    "trajectory",
}

REPORT_SCHEMA = {
    "type": "object",
    "properties": {k: {} for k in _REPORT_KEYS} | {"trajectory": TRAJECTORY_SCHEMA},
    "required": ["trajectory"],
    "additionalProperties": False,
}


class SchemaError(ValueError):
    """Input that does not match its schema; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")


def _path(err: jsonschema.ValidationError) -> str:
    out = "$"
    for part in err.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def _check(data: Any, schema: dict) -> None:
    validator = jsonschema.Draft202012Validator(schema)
    err = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if err is None:
        return
    # oneOf failures hide the useful message in the closest matching branch
    while err.context:
        err = jsonschema.exceptions.best_match(err.context)
    raise SchemaError(err.message, _path(err))


def distribution_from_dict(data: dict) -> GreenDistribution:
    """Build a red-time law from its JSON form."""
    _check(data, _DIST_SCHEMA)
    kind = data["kind"]
    try:
        if kind == "uniform":
            return UniformGreen(float(data["q"]))
        if kind == "exponential":
            return ExponentialGreen(float(data["lambda"]))
        return ExcessGreen(np.asarray(data["cdf_knots"], dtype=float), float(data["mean"]))
    except ValueError as exc:
        raise SchemaError(str(exc), "$.distribution") from exc


def problem_from_dict(data: dict) -> ProblemSpec:
    """Parse and validate a problem object.

    Raises
    ------
    SchemaError
        On unknown or missing fields, wrong types, or values out of range.
    """
    _check(data, PROBLEM_SCHEMA)
    dist = distribution_from_dict(data["distribution"])
    try:
        return ProblemSpec(
            float(data["alpha"]),
            float(data["beta"]),
            float(data["v_max"]),
            float(data["v0"]),
            float(data["d"]),
            float(data["L"]),
            dist,
        )
    except ValueError as exc:
        field = str(exc).split(" ", 1)[0]
        raise SchemaError(str(exc), f"$.{field}" if field in PROBLEM_SCHEMA["properties"] else "$") from exc


def _read_json(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def load_problem(path: str) -> ProblemSpec:
    return problem_from_dict(_read_json(path))


def trajectory_from_json(data: dict, problem: ProblemSpec) -> Trajectory:
    """Trajectory from either a bare ``{"segments": ...}`` object or a solve report."""
    if isinstance(data, dict) and "trajectory" in data:
        _check(data, REPORT_SCHEMA)
        data = data["trajectory"]
    else:
        _check(data, TRAJECTORY_SCHEMA)
    try:
        return Trajectory.from_dict(data, problem)
    except ValueError as exc:
        raise SchemaError(str(exc), "$.segments") from exc


def load_trajectory(path: str, problem: ProblemSpec) -> Trajectory:
    return trajectory_from_json(_read_json(path), problem)


def to_jsonable(obj: Any) -> Any:
    """Plain Python structure with non-finite floats as ``null``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        val = float(obj)
        return val if math.isfinite(val) else None
    return obj


def dumps_json(obj: Any) -> str:
    """Deterministic JSON text; floats use the shortest exact round-trip form."""
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _cell(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """CSV text with 17 significant digits for every float."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()
