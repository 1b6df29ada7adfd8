"""Strict readers for the experiment harness's CSV/JSON output contract.

This package never imports the experiment code; the file formats are the
interface.  Metrics CSVs carry a fixed column order and floats rendered with
17 significant digits, so parsed values re-serialize to the identical
strings.
"""

import json
import math
from pathlib import Path

import numpy as np

METRICS_COLUMNS = ("t", "est_err_sq", "forgetting", "regret", "lambda_min",
                   "q_lambda_min", "l_star", "p_star", "learner", "seed")


class SchemaError(ValueError):
    """An input file does not conform to the output contract."""


def format_float(x: float) -> str:
    """The contract's float rendering: 17 significant digits, ``nan`` literal."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _read_lines(path) -> list:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln]
    if not lines:
        raise SchemaError(f"{path}: empty file")
    return lines


def read_metrics(path) -> dict:
    """Parse a metrics CSV into column arrays, validating the exact schema."""
    lines = _read_lines(path)
    header = tuple(lines[0].split(","))
    if header != METRICS_COLUMNS:
        for i, want in enumerate(METRICS_COLUMNS):
            got = header[i] if i < len(header) else "<missing>"
            if got != want:
                raise SchemaError(f"{path}: column {i + 1} must be {want!r}, found {got!r}")
        raise SchemaError(f"{path}: expected {len(METRICS_COLUMNS)} columns, "
                          f"found {len(header)}")
    rows = [line.split(",") for line in lines[1:]]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    for lineno, parts in enumerate(rows, start=2):
        if len(parts) != len(METRICS_COLUMNS):
            raise SchemaError(f"{path}:{lineno}: wrong number of fields")
    cols: dict = {}
    cols["t"] = np.array([int(p[0]) for p in rows])
    for j, name in enumerate(METRICS_COLUMNS[1:-2], start=1):
        cols[name] = np.array([float(p[j]) for p in rows])
    cols["learner"] = [p[-2] for p in rows]
    cols["seed"] = np.array([int(p[-1]) for p in rows])
    return cols


def read_trajectory(path):
    """Parse a trajectory CSV (``t,w1..wd``) into stages and an (n, d) path."""
    lines = _read_lines(path)
    header = lines[0].split(",")
    if header[0] != "t" or any(h != f"w{i + 1}" for i, h in enumerate(header[1:])):
        raise SchemaError(f"{path}: expected header t,w1..wd, found {lines[0]!r}")
    dim = len(header) - 1
    if dim < 1:
        raise SchemaError(f"{path}: no coordinate columns")
    rows = [line.split(",") for line in lines[1:]]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    for lineno, parts in enumerate(rows, start=2):
        if len(parts) != dim + 1:
            raise SchemaError(f"{path}:{lineno}: wrong number of fields")
    stages = np.array([int(p[0]) for p in rows])
    path_arr = np.array([[float(v) for v in p[1:]] for p in rows])
    return stages, path_arr


def read_summary(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc
