"""``landscape-qubo`` command line interface.

Exit codes: 0 success, 2 invalid input, 3 capacity exceeded, 4 numerical
failure (partial output is still written where a result exists).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .errors import CapacityError, InvalidInputError, NumericalError
from .formats import (
    distribution_csv,
    dumps_json,
    grid_csv,
    landscape_to_dict,
    load_problem,
    problem_to_dict,
    rows_to_csv,
    trace_csv,
    write_text,
)
from .hamiltonian import build, heuristic_parameters
from .landscape import sampling_distribution, solve_landscape
from .qaoa import grid_search, qaoa_cnot_count
from .qubo import brute_force_solve, ising_diagonal
from .varprep import VariationalConfig, optimize

EXIT_OK, EXIT_INVALID, EXIT_CAPACITY, EXIT_NUMERICAL = 0, 2, 3, 4

log = logging.getLogger("landscape_qubo")


class _PartialFailure(Exception):
    """Output was written but the computation did not fully succeed."""


def _parent_parser():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for independent jobs")
    p.add_argument("--out", default=None, help="output file (stdout if omitted)")
    p.add_argument("--format", choices=["json", "csv", "dot"], default=None)
    return p


def _add_hparams(p, required=False):
    p.add_argument("--gamma", type=float, default=None, help="diagonal offset (heuristic if omitted)")
    p.add_argument("--lambda", dest="lambda_", type=float, default=None, help="transverse coupling (heuristic if omitted)")
    p.add_argument("--gamma-rule", choices=["auto", "generic", "maxcut"], default="auto")


def _hparams(args, problem):
    gamma, lam = heuristic_parameters(problem, args.gamma_rule)
    if args.gamma is not None:
        gamma = args.gamma
    if args.lambda_ is not None:
        lam = args.lambda_
    return gamma, lam


def _fmt(args, default, allowed):
    fmt = args.format or default
    if fmt not in allowed:
        raise InvalidInputError(f"--format {fmt} is not supported here (choose from {', '.join(allowed)})")
    return fmt


def cmd_generate(args):
    _fmt(args, "json", ("json",))
    problem = ex.generate(args.kind, args.n, args.seed)
    write_text(dumps_json(problem_to_dict(problem)), args.out)


def cmd_brute_force(args):
    problem = load_problem(args.problem)
    sol = brute_force_solve(problem, with_spectrum=args.spectrum)
    fmt = _fmt(args, "json", ("json", "csv"))
    if fmt == "csv":
        rows = [(b.index, b.label(), sol.optimal_cost) for b in sol.optimizers]
        write_text(rows_to_csv(["index", "bitstring", "cost"], rows), args.out)
        return
    doc = {
        "n": problem.n,
        "optimal_cost": sol.optimal_cost,
        "optimizers": [{"index": b.index, "bitstring": b.label()} for b in sol.optimizers],
        "spectrum": [[c, m] for c, m in sol.spectrum] if sol.spectrum is not None else None,
    }
    write_text(dumps_json(doc), args.out)


def cmd_landscape(args):
    problem = load_problem(args.problem)
    h = build(problem, *_hparams(args, problem))
    lv = solve_landscape(h, tol=args.tol, max_iter=args.max_iter, jacobi=args.jacobi)
    fmt = _fmt(args, "json", ("json", "csv"))
    if fmt == "csv":
        write_text(distribution_csv(sampling_distribution(lv)), args.out)
    else:
        write_text(dumps_json(landscape_to_dict(h, lv)), args.out)
    if not lv.converged:
        raise _PartialFailure(f"CG did not converge: residual {lv.residual_norm:.3e} after {lv.iterations} iterations")


def _axis(values, lo, hi, points, default):
    if values:
        return values
    if lo is None and hi is None:
        return default
    return list(np.linspace(lo, hi, points))


def cmd_sweep(args):
    problem = load_problem(args.problem)
    g_default, l_default = ex.default_sweep_axes(problem, args.points)
    gammas = _axis(args.gammas, args.gamma_min, args.gamma_max, args.points, g_default)
    lambdas = _axis(args.lambdas, args.lambda_min, args.lambda_max, args.points, l_default)
    metrics = set(args.metrics)
    config = ex.SweepConfig(problem, gammas, lambdas, tol=args.tol, metrics=frozenset(metrics))
    grid = ex.run_sweep(config, threads=args.threads)
    levels = "p_by_energy_level" in metrics
    fmt = _fmt(args, "csv", ("csv", "json"))
    if fmt == "csv":
        write_text(rows_to_csv(grid.header(levels), grid.to_rows(levels)), args.out)
    else:
        cells = [dict(zip(grid.header(levels), row)) for row in grid.to_rows(levels)]
        write_text(dumps_json({"n": problem.n, "gamma_values": gammas, "lambda_values": lambdas, "cells": cells}), args.out)


def cmd_hamming(args):
    problem = load_problem(args.problem)
    cmp = ex.run_hamming_comparison(problem, *_hparams(args, problem), resolution=args.resolution)
    profiles = {"landscape": cmp.landscape, "ground_state": cmp.ground_state, "qaoa": cmp.qaoa}
    fmt = _fmt(args, "csv", ("csv", "json"))
    if fmt == "csv":
        rows = [
            [d] + [profiles[k].by_distance[d] for k in profiles] for d in range(problem.n + 1)
        ]
        write_text(rows_to_csv(["distance", *profiles], rows), args.out)
    else:
        doc = {
            "n": problem.n,
            "x_star": cmp.x_star.label(),
            "qaoa_params": {"gamma": cmp.qaoa_params[0], "beta": cmp.qaoa_params[1]},
            "profiles": {k: p.by_distance.tolist() for k, p in profiles.items()},
        }
        write_text(dumps_json(doc), args.out)


def cmd_scaling(args):
    records = ex.run_scaling_study(
        args.kind,
        args.n_values,
        instances=args.instances,
        seed=args.seed,
        gamma_rule=args.gamma_rule,
        lambda_ratio=args.lambda_ratio,
        threads=args.threads,
    )
    header, rows = ex.scaling_rows(records)
    fmt = _fmt(args, "csv", ("csv", "json"))
    if fmt == "csv":
        write_text(rows_to_csv(header, rows), args.out)
    else:
        write_text(dumps_json([dict(zip(header, r)) for r in rows]), args.out)
    if any(r.failed for r in records):
        raise _PartialFailure("some instances failed and were excluded")


def _var_config(args):
    d = {}
    if args.config:
        try:
            d = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read config {args.config}: {exc}") from exc
    for key in ("layers", "restarts", "max_iters", "method"):
        value = getattr(args, key)
        if value is not None:
            d[key] = value
    d.setdefault("seed", args.seed)
    return VariationalConfig.from_dict(d)


def _add_var_args(p):
    p.add_argument("--config", default=None, help="variational config JSON")
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    p.add_argument("--method", choices=["nelder-mead", "cobyla", "gradient"], default=None)


def cmd_variational(args):
    problem = load_problem(args.problem)
    h = build(problem, *_hparams(args, problem))
    config = _var_config(args)
    lv = solve_landscape(h)
    trace = optimize(h, config, landscape_u=lv.u if lv.converged else None, threads=args.threads)
    fmt = _fmt(args, "csv", ("csv", "json"))
    if fmt == "csv":
        write_text(trace_csv(trace), args.out)
    else:
        doc = {
            "config": config.to_dict(),
            "best_fv": trace.best_fv,
            "best_theta": trace.best_params.theta.tolist(),
            "restarts": [
                {"restart": r.restart, "best_fv": r.best_fv, "fidelity": r.fidelity} for r in trace.restarts
            ],
        }
        write_text(dumps_json(doc), args.out)


def cmd_qaoa(args):
    problem = load_problem(args.problem)
    result = grid_search(
        ising_diagonal(problem),
        resolution=args.resolution,
        gamma_range=tuple(args.gamma_range),
        beta_range=tuple(args.beta_range),
    )
    fmt = _fmt(args, "csv", ("csv", "json"))
    if fmt == "csv":
        write_text(grid_csv(result), args.out)
    else:
        doc = {
            "resolution": args.resolution,
            "best_cell": {"gamma": result.best_cell[0], "beta": result.best_cell[1], "expectation": result.best_value},
            "refined": dict(zip(("gamma", "beta", "expectation"), result.refined)),
            "path": [list(p) for p in result.path],
            "cnot_count_p1": qaoa_cnot_count(problem, 1),
        }
        write_text(dumps_json(doc), args.out)


def cmd_fock_graph(args):
    problem = load_problem(args.problem)
    graph = ex.export_fock_graph(problem, *_hparams(args, problem))
    fmt = _fmt(args, "json", ("json", "dot"))
    write_text(ex.fock_graph_dot(graph) if fmt == "dot" else dumps_json(graph), args.out)


def cmd_compare(args):
    problem = load_problem(args.problem)
    config = _var_config(args)
    report, trace = ex.run_comparison(
        problem, *_hparams(args, problem), var_config=config, resolution=args.resolution, threads=args.threads
    )
    _fmt(args, "json", ("json",))
    write_text(dumps_json(report), args.out)
    if args.trace_out:
        Path(args.trace_out).write_text(trace_csv(trace))


def build_parser() -> argparse.ArgumentParser:
    parent = _parent_parser()
    parser = argparse.ArgumentParser(
        prog="landscape-qubo",
        description="Sample low-energy QUBO solutions from the localization landscape of a perturbed Ising Hamiltonian.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[parent], help="generate a problem instance")
    p.add_argument("--kind", choices=["random", "maxcut"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("brute-force", parents=[parent], help="exact optimum by exhaustive scan")
    p.add_argument("--problem", required=True)
    p.add_argument("--spectrum", action="store_true", help="include the (cost, multiplicity) spectrum")
    p.set_defaults(func=cmd_brute_force)

    p = sub.add_parser("landscape", parents=[parent], help="solve H u = 1 (json) or export its distribution (csv)")
    p.add_argument("--problem", required=True)
    _add_hparams(p)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--jacobi", action="store_true", help="diagonal preconditioner")
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("sweep", parents=[parent], help="gamma x lambda sweep of landscape metrics")
    p.add_argument("--problem", required=True)
    p.add_argument("--gammas", type=float, nargs="+", default=None)
    p.add_argument("--lambdas", type=float, nargs="+", default=None)
    p.add_argument("--gamma-min", type=float, default=None)
    p.add_argument("--gamma-max", type=float, default=None)
    p.add_argument("--lambda-min", type=float, default=None)
    p.add_argument("--lambda-max", type=float, default=None)
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument(
        "--metrics", nargs="+", default=["p_xstar", "argmax_hamming", "validity"], choices=sorted(ex.METRICS)
    )
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("hamming", parents=[parent], help="Hamming-distance profiles around x*")
    p.add_argument("--problem", required=True)
    _add_hparams(p)
    p.add_argument("--resolution", type=int, default=100)
    p.set_defaults(func=cmd_hamming)

    p = sub.add_parser("scaling", parents=[parent], help="lowest-level probabilities versus problem size")
    p.add_argument("--kind", choices=["random", "maxcut"], required=True)
    p.add_argument("--n-values", type=int, nargs="+", required=True)
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--gamma-rule", choices=["auto", "generic", "maxcut"], default="auto")
    p.add_argument("--lambda-ratio", type=float, default=None, help="override lambda = ratio * gamma")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("variational", parents=[parent], help="variational preparation of |u>")
    p.add_argument("--problem", required=True)
    _add_hparams(p)
    _add_var_args(p)
    p.set_defaults(func=cmd_variational)

    p = sub.add_parser("qaoa", parents=[parent], help="depth-one QAOA grid search")
    p.add_argument("--problem", required=True)
    p.add_argument("--resolution", type=int, default=100)
    p.add_argument("--gamma-range", type=float, nargs=2, default=[0.0, 2 * np.pi])
    p.add_argument("--beta-range", type=float, nargs=2, default=[0.0, np.pi])
    p.set_defaults(func=cmd_qaoa)

    p = sub.add_parser("fock-graph", parents=[parent], help="export the Fock-space hypercube graph")
    p.add_argument("--problem", required=True)
    _add_hparams(p)
    p.set_defaults(func=cmd_fock_graph)

    p = sub.add_parser("compare", parents=[parent], help="landscape vs. ansatz vs. QAOA report")
    p.add_argument("--problem", required=True)
    _add_hparams(p)
    _add_var_args(p)
    p.add_argument("--resolution", type=int, default=100)
    p.add_argument("--trace-out", default=None, help="also write the optimization trace CSV here")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except _PartialFailure as exc:
        log.error("%s", exc)
        return EXIT_NUMERICAL
    except InvalidInputError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INVALID
    except CapacityError as exc:
        log.error("capacity exceeded: %s", exc)
        return EXIT_CAPACITY
    except (NumericalError, ZeroDivisionError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
