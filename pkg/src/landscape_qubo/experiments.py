"""Experiment pipelines: hyperparameter sweeps, Hamming-distance comparisons,
size scaling, Fock-graph export and the landscape/ansatz/QAOA comparison.

Independent jobs (sweep cells, scaling instances) go through :func:`_map`,
which keeps results in submission order so outputs do not depend on the
worker count.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CapacityError, InvalidInputError
from .hamiltonian import DENSE_LIMIT, build, dense_matrix, heuristic_parameters, validity_check
from .landscape import (
    DistributionSource,
    HammingProfile,
    hamming_profile,
    level_probabilities,
    sampling_distribution,
    solve_landscape,
    uniform_distribution,
)
from .qaoa import grid_search, qaoa_state
from .qubo import (
    Bitstring,
    ProblemKind,
    QuboProblem,
    brute_force_solve,
    generate_maxcut_3regular,
    generate_random_qubo,
    group_levels,
    ising_diagonal,
    popcount,
)
from .statevector import expectation_ising
from .varprep import VariationalConfig, optimize, prepare_ansatz

log = logging.getLogger(__name__)

METRICS = frozenset({"p_xstar", "argmax_hamming", "validity", "p_by_energy_level"})
INVERSE_CHECK_LIMIT = 12
FOCK_GRAPH_LIMIT = 10
SCALING_LIMIT = 14
LEVELS = 3


def _map(fn, items, threads=1):
    items = list(items)
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def instance_seed(seed: int, *keys) -> int:
    """Deterministic 63-bit child seed for a (seed, keys...) tuple."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1, np.uint64)[0] >> np.uint64(1))


def generate(kind, n: int, seed: int) -> QuboProblem:
    kind = _kind(kind)
    if kind is ProblemKind.RANDOM_DENSE:
        return generate_random_qubo(n, seed)
    if kind is ProblemKind.MAXCUT_3REGULAR:
        return generate_maxcut_3regular(n, seed)
    raise InvalidInputError(f"cannot generate problems of kind {kind.value}")


def _kind(kind) -> ProblemKind:
    aliases = {"random": ProblemKind.RANDOM_DENSE, "maxcut": ProblemKind.MAXCUT_3REGULAR}
    if isinstance(kind, str) and kind in aliases:
        return aliases[kind]
    return ProblemKind(kind)


def optimizer_indices(problem_or_diag) -> np.ndarray:
    diag = problem_or_diag if isinstance(problem_or_diag, np.ndarray) else None
    if diag is None:
        return np.array([b.index for b in brute_force_solve(problem_or_diag).optimizers])
    return np.flatnonzero(diag == diag.min())


def nearest_optimizer_distance(index: int, optimizers) -> int:
    return int(popcount(np.asarray(optimizers) ^ int(index)).min())


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------


@dataclass
class SweepConfig:
    problem: QuboProblem
    gamma_values: list
    lambda_values: list
    tol: float = 1e-10
    metrics: frozenset = field(default_factory=lambda: frozenset({"p_xstar", "argmax_hamming", "validity"}))
    check_inverse: Optional[bool] = None

    def __post_init__(self):
        self.gamma_values = [float(g) for g in self.gamma_values]
        self.lambda_values = [float(lam) for lam in self.lambda_values]
        if not self.gamma_values or not self.lambda_values:
            raise InvalidInputError("sweep grids must be nonempty")
        if not all(np.isfinite(self.gamma_values + self.lambda_values)):
            raise InvalidInputError("sweep values must be finite")
        if any(lam <= 0 for lam in self.lambda_values):
            raise InvalidInputError("lambda values must be > 0")
        unknown = set(self.metrics) - METRICS
        if unknown:
            raise InvalidInputError(f"unknown metrics: {sorted(unknown)}")
        self.metrics = frozenset(self.metrics)


@dataclass
class SweepCell:
    gamma: float
    lambda_: float
    valid: bool
    cg_converged: bool
    p_xstar: Optional[float] = None
    argmax_hd: Optional[int] = None
    min_eigenvalue: Optional[float] = None
    p_levels: Optional[list] = None


@dataclass
class SweepGrid:
    gamma_values: list
    lambda_values: list
    cells: list

    def cell(self, i: int, j: int) -> SweepCell:
        """Cell for ``gamma_values[i]`` and ``lambda_values[j]``."""
        return self.cells[i * len(self.lambda_values) + j]

    def to_rows(self, with_levels=False):
        for c in self.cells:
            row = [c.gamma, c.lambda_, c.valid, c.cg_converged, c.p_xstar, c.argmax_hd]
            if with_levels:
                row += list(c.p_levels) if c.p_levels is not None else [None] * LEVELS
            yield row

    def header(self, with_levels=False):
        cols = ["gamma", "lambda", "valid", "cg_converged", "p_xstar", "argmax_hd"]
        return cols + [f"p_level{k}" for k in range(LEVELS)] if with_levels else cols


def default_sweep_axes(problem: QuboProblem, points: int = 21):
    """Gamma on [0, 2 * heuristic], lambda on (0, 2]."""
    g_max = 2 * heuristic_parameters(problem)[0]
    return list(np.linspace(0.0, g_max, points)), list(np.linspace(2.0 / points, 2.0, points))


def _sweep_cell(problem, diag_info, config, gamma, lam) -> SweepCell:
    optimizers, levels = diag_info
    h = build(problem, gamma, lam)
    min_eig = None
    if problem.n <= DENSE_LIMIT:
        check_inverse = config.check_inverse
        if check_inverse is None:
            check_inverse = problem.n <= INVERSE_CHECK_LIMIT
        report = validity_check(h, check_inverse=check_inverse)
        valid, min_eig = report.valid, report.min_eigenvalue
    else:
        valid = bool(h.diagonal.min() >= 0)
    cell = SweepCell(gamma, lam, valid, False, min_eigenvalue=min_eig)
    if not valid:
        return cell
    lv = solve_landscape(h, tol=config.tol)
    cell.cg_converged = lv.converged
    if not lv.converged:
        cell.valid = False
        return cell
    dist = sampling_distribution(lv)
    if "p_xstar" in config.metrics:
        cell.p_xstar = float(dist.probs[optimizers].sum())
    if "argmax_hamming" in config.metrics:
        cell.argmax_hd = nearest_optimizer_distance(int(np.argmax(dist.probs)), optimizers)
    if "p_by_energy_level" in config.metrics:
        probs = level_probabilities(dist, levels)
        cell.p_levels = probs + [0.0] * (LEVELS - len(probs))
    return cell


def run_sweep(config: SweepConfig, threads: int = 1) -> SweepGrid:
    """Evaluate landscape metrics over the gamma x lambda grid.

    Cells whose operator fails the validity checks, or whose solve does not
    converge, are marked invalid and carry no metrics.
    """
    problem = config.problem
    diag_levels = group_levels(ising_diagonal(problem))[:LEVELS]
    info = (optimizer_indices(problem), diag_levels)
    pairs = [(g, lam) for g in config.gamma_values for lam in config.lambda_values]
    cells = _map(lambda gl: _sweep_cell(problem, info, config, *gl), pairs, threads)
    return SweepGrid(config.gamma_values, config.lambda_values, cells)


# --------------------------------------------------------------------------
# Hamming-distance profiles
# --------------------------------------------------------------------------


@dataclass
class HammingComparison:
    x_star: Bitstring
    landscape: HammingProfile
    ground_state: HammingProfile
    qaoa: HammingProfile
    qaoa_params: tuple


def run_hamming_comparison(problem: QuboProblem, gamma: float, lambda_: float, resolution: int = 100):
    """Profiles around x* for the landscape state, the ground state of H and
    the refined depth-one QAOA state."""
    if problem.n > INVERSE_CHECK_LIMIT:
        raise CapacityError(f"hamming comparison supports n <= {INVERSE_CHECK_LIMIT}, got {problem.n}")
    h = build(problem, gamma, lambda_)
    x_star = brute_force_solve(problem).optimizers[0]
    lv = solve_landscape(h)
    u_dist = sampling_distribution(lv, DistributionSource.EXACT_LANDSCAPE)
    _, vecs = np.linalg.eigh(dense_matrix(h))
    gs_dist = sampling_distribution(vecs[:, 0], DistributionSource.GROUND_STATE_OF_H)
    gs = grid_search(h.ising_diag, resolution=resolution)
    q_dist = sampling_distribution(qaoa_state(gs.refined_params, h.ising_diag), DistributionSource.QAOA_STATE)
    return HammingComparison(
        x_star,
        hamming_profile(u_dist, x_star, per_bitstring=True),
        hamming_profile(gs_dist, x_star, per_bitstring=True),
        hamming_profile(q_dist, x_star, per_bitstring=True),
        (gs.refined[0], gs.refined[1]),
    )


# --------------------------------------------------------------------------
# Scaling study
# --------------------------------------------------------------------------


@dataclass
class ScalingRecord:
    n: int
    kind: str
    instances: int
    succeeded: int
    level_probs: list
    uniform_baseline: float
    gamma_rule: str
    per_instance: list = field(default_factory=list, repr=False)

    @property
    def failed(self) -> int:
        return self.instances - self.succeeded

    @property
    def p_xstar(self) -> float:
        return self.level_probs[0]


def _scaling_instance(kind, n, seed, i, gamma_rule, lambda_ratio):
    problem = generate(kind, n, instance_seed(seed, n, i))
    gamma, lam = heuristic_parameters(problem, gamma_rule)
    if lambda_ratio is not None:
        lam = lambda_ratio * gamma
    h = build(problem, gamma, lam)
    lv = solve_landscape(h)
    if not lv.converged:
        return None
    dist = sampling_distribution(lv)
    levels = group_levels(h.ising_diag)[:LEVELS]
    probs = level_probabilities(dist, levels)
    probs += [0.0] * (LEVELS - len(probs))
    return probs


def run_scaling_study(
    kind,
    n_values,
    instances: int = 100,
    seed: int = 0,
    gamma_rule: str = "auto",
    lambda_ratio: Optional[float] = None,
    threads: int = 1,
) -> list:
    """Mean probabilities of the three lowest energy levels under ``|u>``.

    Each level's probability sums over its degenerate bitstrings. Instance
    ``i`` at size ``n`` is generated from ``instance_seed(seed, n, i)``, so two
    studies with the same seed see the same instances whatever the gamma rule.
    Instances whose solve fails are logged and excluded from the means.
    """
    kind = _kind(kind)
    if instances < 1:
        raise InvalidInputError("instances must be >= 1")
    records = []
    for n in n_values:
        if n > SCALING_LIMIT:
            raise CapacityError(f"scaling study supports n <= {SCALING_LIMIT}, got {n}")
        results = _map(lambda i: _scaling_instance(kind, n, seed, i, gamma_rule, lambda_ratio), range(instances), threads)
        ok = [r for r in results if r is not None]
        if len(ok) < instances:
            log.warning("n=%d: %d of %d instances failed and were excluded", n, instances - len(ok), instances)
        means = list(np.mean(ok, axis=0)) if ok else [float("nan")] * LEVELS
        rule = gamma_rule
        if rule == "auto":
            rule = "maxcut" if kind is ProblemKind.MAXCUT_3REGULAR else "generic"
        records.append(
            ScalingRecord(n, kind.value, instances, len(ok), [float(m) for m in means], 2.0**-n, rule, ok)
        )
    return records


def scaling_rows(records):
    header = ["n", "kind", "gamma_rule", "instances", "succeeded"] + [f"p_level{k}" for k in range(LEVELS)] + [
        "uniform_baseline"
    ]
    rows = [[r.n, r.kind, r.gamma_rule, r.instances, r.succeeded, *r.level_probs, r.uniform_baseline] for r in records]
    return header, rows


# --------------------------------------------------------------------------
# Fock-space graph
# --------------------------------------------------------------------------


def export_fock_graph(problem: QuboProblem, gamma: float, lambda_: float) -> dict:
    """Hypercube graph with per-node normalized energy and landscape amplitude."""
    n = problem.n
    if n > FOCK_GRAPH_LIMIT:
        raise CapacityError(f"fock graph export supports n <= {FOCK_GRAPH_LIMIT}, got {n}")
    h = build(problem, gamma, lambda_)
    lv = solve_landscape(h)
    diag = h.ising_diag
    span = diag.max() - diag.min()
    energy = (diag - diag.min()) / span if span > 0 else np.zeros_like(diag)
    amp = np.abs(lv.u) / np.abs(lv.u).max()
    nodes = [
        {
            "id": j,
            "label": Bitstring.from_index(j, n).label(),
            "energy": float(energy[j]),
            "amplitude": float(amp[j]),
        }
        for j in range(1 << n)
    ]
    edges = [[j, j ^ (1 << k)] for j in range(1 << n) for k in range(n) if j < j ^ (1 << k)]
    return {"n": n, "gamma": h.gamma, "lambda": h.lambda_, "converged": lv.converged, "nodes": nodes, "edges": edges}


def fock_graph_dot(graph: dict) -> str:
    lines = ["graph fock {"]
    for node in graph["nodes"]:
        lines.append(
            f'  {node["id"]} [label="{node["label"]}", energy={node["energy"]!r}, amplitude={node["amplitude"]!r}];'
        )
    for a, b in graph["edges"]:
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Landscape vs. ansatz vs. QAOA
# --------------------------------------------------------------------------


def run_comparison(
    problem: QuboProblem,
    gamma: float,
    lambda_: float,
    var_config: Optional[VariationalConfig] = None,
    resolution: int = 100,
    threads: int = 1,
):
    """Reference ``<H_ising>`` values: uniform sampling, exact ``|u>``, the
    optimized ansatz and refined depth-one QAOA, plus the optimization trace.

    Returns ``(report, trace)`` where ``report`` is JSON-ready.
    """
    var_config = var_config or VariationalConfig()
    h = build(problem, gamma, lambda_)
    solution = brute_force_solve(problem)
    lv = solve_landscape(h)
    u_dist = sampling_distribution(lv)
    trace = optimize(h, var_config, landscape_u=lv.u, threads=threads)
    psi = prepare_ansatz(trace.best_params)
    gs = grid_search(h.ising_diag, resolution=resolution)
    optimizers = [b.index for b in solution.optimizers]
    report = {
        "n": problem.n,
        "kind": problem.kind.value,
        "problem_seed": problem.seed,
        "gamma": h.gamma,
        "lambda": h.lambda_,
        "optimal_cost": solution.optimal_cost,
        "degeneracy": len(optimizers),
        "landscape_converged": lv.converged,
        "references": {
            "uniform": expectation_ising(h.ising_diag, uniform_distribution(problem.n)),
            "exact_landscape": expectation_ising(h.ising_diag, u_dist),
            "ansatz": expectation_ising(h.ising_diag, psi),
            "qaoa_p1": gs.refined[2],
        },
        "p_xstar": {
            "uniform": len(optimizers) / (1 << problem.n),
            "exact_landscape": float(u_dist.probs[optimizers].sum()),
            "ansatz": float((psi[optimizers] ** 2).sum()),
            "qaoa_p1": float((np.abs(qaoa_state(gs.refined_params, h.ising_diag)[optimizers]) ** 2).sum()),
        },
        "qaoa": {"gamma": gs.refined[0], "beta": gs.refined[1], "grid_best": gs.best_value},
        "variational": {
            "config": var_config.to_dict(),
            "best_fv": trace.best_fv,
            "restarts": [
                {
                    "restart": rt.restart,
                    "best_fv": rt.best_fv,
                    "fidelity": rt.fidelity,
                    "iterations": len(rt.iterations) - 1,
                    "final_sampled_mean": rt.sampled_stats[-1][1] if rt.sampled_stats else None,
                }
                for rt in trace.restarts
            ],
        },
    }
    return report, trace


def tight_parameters(problem: QuboProblem, offset: float = 1.0, lambda_: float = 0.3):
    """Gamma just above ``-C(x*)`` (needs the exact optimum) with a fixed lambda."""
    return -brute_force_solve(problem).optimal_cost + offset, lambda_

