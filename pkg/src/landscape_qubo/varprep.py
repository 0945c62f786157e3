"""Variational preparation of the landscape state.

A hardware-efficient real-amplitude ansatz (Hadamard layer, then alternating
``R_y`` layers and a linear CNOT chain) is trained to minimize

    f_v(theta) = (<psi|H|psi> - <psi|+>)**2

either derivative-free (Nelder-Mead, or COBYLA from scipy) or by gradient
descent with parameter-shift gradients.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import pi
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidInputError, SingularOverlapError
from .hamiltonian import PerturbedHamiltonian
from .qubo import QuboProblem, ising_diagonal
from .landscape import DistributionSource, sample_bitstrings, sampling_distribution
from .statevector import apply_cnot, apply_ry, expectation_perturbed, overlap_plus, plus_state

log = logging.getLogger(__name__)

METHODS = ("nelder-mead", "cobyla", "gradient")
SHIFT = pi / 2
OVERLAP_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class AnsatzParams:
    n: int
    layers: int
    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64).reshape(self.layers, self.n)
        if self.layers < 1 or self.n < 1:
            raise InvalidInputError("ansatz needs at least one layer and one qubit")
        if not np.all(np.isfinite(theta)):
            raise InvalidInputError("ansatz angles must be finite")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def zeros(cls, n: int, layers: int = 4) -> "AnsatzParams":
        return cls(n, layers, np.zeros((layers, n)))

    def with_theta(self, theta) -> "AnsatzParams":
        return AnsatzParams(self.n, self.layers, theta)

    @property
    def size(self) -> int:
        return self.layers * self.n


@dataclass
class VariationalConfig:
    layers: int = 4
    restarts: int = 10
    max_iters: int = 2000
    method: str = "nelder-mead"
    sample_interval: int = 200
    sample_count: int = 10
    seed: int = 0
    step: float = 0.5
    xatol: float = 1e-10
    fatol: float = 1e-14

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidInputError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.layers < 1 or self.restarts < 1 or self.max_iters < 1:
            raise InvalidInputError("layers, restarts and max_iters must be >= 1")
        if self.sample_interval < 1 or self.sample_count < 1:
            raise InvalidInputError("sample_interval and sample_count must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "VariationalConfig":
        known = cls.__dataclass_fields__
        unknown = set(d) - set(known)
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class RestartTrace:
    restart: int
    iterations: list = field(default_factory=list)
    sampled_stats: list = field(default_factory=list)
    best_params: Optional[AnsatzParams] = None
    best_fv: float = np.inf
    fidelity: Optional[float] = None


@dataclass
class OptimizationTrace:
    restarts: list
    best_params: AnsatzParams
    best_fv: float

    @property
    def iterations(self) -> list:
        """``(iteration, f_v)`` pairs of the best restart."""
        return min(self.restarts, key=lambda r: r.best_fv).iterations

    @property
    def sampled_stats(self) -> list:
        return min(self.restarts, key=lambda r: r.best_fv).sampled_stats


def cnot_count(n: int, layers: int) -> int:
    return layers * (n - 1)


def prepare_ansatz(params: AnsatzParams) -> np.ndarray:
    state = plus_state(params.n)
    for layer in params.theta:
        for q, angle in enumerate(layer):
            state = apply_ry(state, q, angle)
        for q in range(params.n - 1):
            state = apply_cnot(state, q, q + 1)
    return state


def _fv_terms(params, h):
    state = prepare_ansatz(params)
    return expectation_perturbed(h, state), overlap_plus(state), state


def cost_fv(params: AnsatzParams, h: PerturbedHamiltonian) -> float:
    if params.n != h.n:
        raise InvalidInputError(f"ansatz has {params.n} qubits, Hamiltonian has {h.n}")
    energy, overlap, _ = _fv_terms(params, h)
    return (energy - overlap) ** 2


def gradient_fv(params: AnsatzParams, h: PerturbedHamiltonian, stats: Optional[dict] = None) -> np.ndarray:
    """Parameter-shift gradient of ``f_v``.

    The overlap derivative is recovered from the shifted projector expectation
    ``<M> = <psi|+>**2`` divided by the unshifted overlap, which is valid
    because the ansatz keeps amplitudes real. One unshifted and two shifted
    preparations per angle are used; ``stats["preparations"]`` is incremented
    by that count when a dict is passed.
    """
    if params.n != h.n:
        raise InvalidInputError(f"ansatz has {params.n} qubits, Hamiltonian has {h.n}")
    preps = 0

    def measure(p):
        nonlocal preps
        preps += 1
        energy, overlap, _ = _fv_terms(p, h)
        return energy, overlap

    energy, overlap = measure(params)
    if abs(overlap) < OVERLAP_EPS:
        raise SingularOverlapError(f"<psi|+> = {overlap:.3e} is too small for the shift rule")
    grad = np.zeros_like(params.theta)
    for idx in np.ndindex(params.theta.shape):
        shifted = []
        for sign in (1.0, -1.0):
            theta = params.theta.copy()
            theta[idx] += sign * SHIFT
            shifted.append(measure(params.with_theta(theta)))
        (e_plus, o_plus), (e_minus, o_minus) = shifted
        d_energy = 0.5 * (e_plus - e_minus)
        d_overlap = 0.25 * (o_plus**2 - o_minus**2) / overlap
        grad[idx] = 2.0 * (energy - overlap) * (d_energy - d_overlap)
    if stats is not None:
        stats["preparations"] = stats.get("preparations", 0) + preps
    return grad


def sampled_qubo_stats(state: np.ndarray, ising_diag, shots: int, seed) -> tuple:
    """Mean and population std of the QUBO cost over sampled bitstrings.

    ``ising_diag`` may be the cost vector or a :class:`QuboProblem`.
    """
    if isinstance(ising_diag, QuboProblem):
        ising_diag = ising_diagonal(ising_diag)
    dist = sampling_distribution(state, DistributionSource.ANSATZ_STATE)
    costs = np.asarray(ising_diag)[sample_bitstrings(dist, shots, seed)]
    return float(costs.mean()), float(costs.std())


def _run_restart(h, config, restart, landscape_u=None) -> RestartTrace:
    n, layers = h.n, config.layers
    rng = np.random.default_rng([config.seed, restart])
    x0 = rng.uniform(0.0, 2 * pi, size=layers * n)
    trace = RestartTrace(restart)

    def fv_of(x):
        return cost_fv(AnsatzParams(n, layers, x), h)

    def record(it, x, fv):
        trace.iterations.append((it, float(fv)))
        if fv < trace.best_fv:
            trace.best_fv = float(fv)
            trace.best_params = AnsatzParams(n, layers, x)
        if it % config.sample_interval == 0:
            state = prepare_ansatz(AnsatzParams(n, layers, x))
            mean, std = sampled_qubo_stats(state, h.ising_diag, config.sample_count, [config.seed, restart, it])
            trace.sampled_stats.append((it, mean, std))

    record(0, x0, fv_of(x0))

    if config.method == "nelder-mead":
        counter = [0]

        def callback(intermediate_result):
            counter[0] += 1
            record(counter[0], intermediate_result.x, intermediate_result.fun)

        minimize(
            fv_of,
            x0,
            method="Nelder-Mead",
            callback=callback,
            options={"maxiter": config.max_iters, "xatol": config.xatol, "fatol": config.fatol, "adaptive": True},
        )
    elif config.method == "cobyla":
        # COBYLA spends one evaluation per iteration; each one is recorded.
        counter = [0]

        def traced(x):
            fv = fv_of(x)
            if counter[0] < config.max_iters:
                counter[0] += 1
                record(counter[0], x.copy(), fv)
            return fv

        minimize(traced, x0, method="COBYLA", options={"maxiter": config.max_iters, "tol": 1e-12})
    else:
        x = x0.copy()
        fv = trace.iterations[0][1]
        for it in range(1, config.max_iters + 1):
            try:
                g = gradient_fv(AnsatzParams(n, layers, x), h).ravel()
            except SingularOverlapError as exc:
                log.warning("restart %d stopped at iteration %d: %s", restart, it, exc)
                break
            gg = float(g @ g)
            if gg < 1e-28:
                break
            t = config.step
            # Armijo backtracking, c = 1e-4, halving.
            while True:
                trial = x - t * g
                f_trial = fv_of(trial)
                if f_trial <= fv - 1e-4 * t * gg or t < 1e-12:
                    break
                t *= 0.5
            if f_trial > fv:
                break
            x, fv = trial, f_trial
            record(it, x, fv)

    if landscape_u is not None and trace.best_params is not None:
        psi = prepare_ansatz(trace.best_params)
        trace.fidelity = float(abs(psi @ landscape_u) / np.linalg.norm(landscape_u))
    return trace


def optimize(
    h: PerturbedHamiltonian,
    config: Optional[VariationalConfig] = None,
    landscape_u: Optional[np.ndarray] = None,
    threads: int = 1,
) -> OptimizationTrace:
    """Run ``config.restarts`` independently seeded optimizations.

    Each restart draws its starting angles uniformly from ``[0, 2 pi)`` using
    the seed pair ``(config.seed, restart)``. Every ``sample_interval``
    iterations the current state is sampled ``sample_count`` times and the
    mean and std of the QUBO cost are recorded. When ``landscape_u`` is
    given, each restart also reports the fidelity of its best state with it.
    """
    config = config or VariationalConfig()
    jobs = range(config.restarts)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            traces = list(pool.map(lambda r: _run_restart(h, config, r, landscape_u), jobs))
    else:
        traces = [_run_restart(h, config, r, landscape_u) for r in jobs]
    best = min(traces, key=lambda t: t.best_fv)
    return OptimizationTrace(traces, best.best_params, best.best_fv)
