"""Readers and writers for the on-disk formats (see docs/formats.md).

Floats are written with ``repr`` so that files round-trip exactly and
identical runs produce byte-identical output.
"""
from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .qubo import Bitstring, ProblemKind, QuboProblem


def _num(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else _num(v) for v in row])
    return buf.getvalue()


def problem_to_dict(problem: QuboProblem) -> dict:
    return {
        "n": problem.n,
        "kind": problem.kind.value,
        "seed": problem.seed,
        "a": problem.a.tolist(),
        "edges": [list(e) for e in problem.edges] if problem.edges is not None else None,
    }


def problem_from_dict(d: dict) -> QuboProblem:
    try:
        n = int(d["n"])
        a = np.array(d["a"], dtype=np.float64)
        kind = ProblemKind(d.get("kind", "custom"))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed problem document: {exc}") from exc
    if a.shape != (n, n):
        raise InvalidInputError(f"matrix shape {a.shape} does not match n={n}")
    edges = d.get("edges")
    problem = QuboProblem(a, kind, seed=d.get("seed"), edges=edges)
    if kind is ProblemKind.RANDOM_DENSE and np.abs(problem.a).max() > 1:
        raise InvalidInputError("random_dense problems must have entries in [-1, 1]")
    return problem


def load_problem(path) -> QuboProblem:
    try:
        text = Path(path).read_text()
        return problem_from_dict(json.loads(text))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read problem file {path}: {exc}") from exc


def save_problem(problem: QuboProblem, path) -> None:
    Path(path).write_text(dumps_json(problem_to_dict(problem)))


def landscape_to_dict(h, lv) -> dict:
    return {
        "n": h.n,
        "gamma": h.gamma,
        "lambda": h.lambda_,
        "u": lv.u.tolist(),
        "residual": lv.residual_norm,
        "iterations": lv.iterations,
    }


def distribution_csv(dist) -> str:
    n = dist.n
    rows = ((j, Bitstring.from_index(j, n).label(), p) for j, p in enumerate(dist.probs))
    return rows_to_csv(["index", "bitstring", "probability"], rows)


def trace_csv(trace) -> str:
    rows = []
    for rt in trace.restarts:
        sampled = {it: (m, s) for it, m, s in rt.sampled_stats}
        for it, fv in rt.iterations:
            m, s = sampled.get(it, (None, None))
            rows.append((rt.restart, it, fv, m, s))
    return rows_to_csv(["restart", "iteration", "fv", "mean_cq", "std_cq"], rows)


def grid_csv(result) -> str:
    rows = (
        (g, b, result.grid[i, j])
        for i, g in enumerate(result.gammas)
        for j, b in enumerate(result.betas)
    )
    return rows_to_csv(["gamma", "beta", "expectation"], rows)


def write_text(text: str, out) -> None:
    """Write to a path, or to stdout when ``out`` is None or ``-``."""
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
