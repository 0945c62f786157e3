"""QAOA reference: ``prod_i U_x(beta_i) U_H(gamma_i) |+>`` with
``U_H = exp(-i gamma H_ising)`` and ``U_x = exp(-i beta sum_q X_q)``.

Depth one is the benchmark target: a dense grid over ``(gamma, beta)`` is
evaluated in batches and the best cell is refined with Nelder-Mead.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidInputError
from .qubo import QuboProblem
from .statevector import apply_phase, apply_rx_layer, num_qubits, plus_state

DEFAULT_RESOLUTION = 100
DEFAULT_GAMMA_RANGE = (0.0, 2 * pi)
DEFAULT_BETA_RANGE = (0.0, pi)


@dataclass(frozen=True, eq=False)
class QaoaParams:
    gamma: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gamma, dtype=np.float64))
        b = np.atleast_1d(np.asarray(self.beta, dtype=np.float64))
        if g.ndim != 1 or g.shape != b.shape or g.size < 1:
            raise InvalidInputError("gamma and beta must be equal-length 1-D sequences with p >= 1")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "beta", b)

    @property
    def p(self) -> int:
        return self.gamma.size


@dataclass
class GridSearchResult:
    gammas: np.ndarray
    betas: np.ndarray
    grid: np.ndarray
    best_cell: tuple
    best_value: float
    refined: tuple
    path: list = field(default_factory=list)

    @property
    def refined_params(self) -> QaoaParams:
        return QaoaParams([self.refined[0]], [self.refined[1]])


def qaoa_state(params: QaoaParams, ising_diag) -> np.ndarray:
    ising_diag = np.asarray(ising_diag, dtype=np.float64)
    n = num_qubits(ising_diag)
    state = plus_state(n).astype(np.complex128)
    for g, b in zip(params.gamma, params.beta):
        state = apply_phase(state, ising_diag, g)
        state = apply_rx_layer(state, b)
    return state


def qaoa_expectation(params: QaoaParams, ising_diag) -> float:
    state = qaoa_state(params, ising_diag)
    return float((np.abs(state) ** 2) @ np.asarray(ising_diag))


def _mixer_batch(states: np.ndarray, betas: np.ndarray) -> np.ndarray:
    """Apply ``exp(-i beta sum X)`` to one row of ``states`` per beta."""
    b = states.shape[0]
    n = int(states.shape[1]).bit_length() - 1
    c = np.cos(betas)[:, None, None]
    s = (-1j * np.sin(betas))[:, None, None]
    for q in range(n):
        view = states.reshape(b, -1, 2, 1 << q)
        a0 = view[:, :, 0, :].copy()
        a1 = view[:, :, 1, :]
        view[:, :, 0, :] = c * a0 + s * a1
        view[:, :, 1, :] = s * a0 + c * a1
    return states


def expectation_grid(ising_diag, gammas, betas) -> np.ndarray:
    """Depth-one expectation on the outer grid, rows indexed by gamma."""
    ising_diag = np.asarray(ising_diag, dtype=np.float64)
    n = num_qubits(ising_diag)
    betas = np.asarray(betas, dtype=np.float64)
    plus = plus_state(n)
    grid = np.empty((len(gammas), len(betas)))
    for i, g in enumerate(gammas):
        phased = plus * np.exp(-1j * g * ising_diag)
        states = np.broadcast_to(phased, (len(betas), phased.size)).copy()
        states = _mixer_batch(states, betas)
        grid[i] = (np.abs(states) ** 2) @ ising_diag
    return grid


def grid_search(
    ising_diag,
    resolution: int = DEFAULT_RESOLUTION,
    gamma_range=DEFAULT_GAMMA_RANGE,
    beta_range=DEFAULT_BETA_RANGE,
    refine: bool = True,
    max_refine_iters: int = 500,
) -> GridSearchResult:
    """Grid search over depth-one angles followed by a local Nelder-Mead polish.

    Grid points are ``resolution`` evenly spaced values per axis with the upper
    end of each range excluded.
    """
    if resolution < 2:
        raise InvalidInputError(f"resolution must be >= 2, got {resolution}")
    ising_diag = np.asarray(ising_diag, dtype=np.float64)
    gammas = np.linspace(*gamma_range, resolution, endpoint=False)
    betas = np.linspace(*beta_range, resolution, endpoint=False)
    grid = expectation_grid(ising_diag, gammas, betas)
    i, j = np.unravel_index(int(np.argmin(grid)), grid.shape)
    best_cell = (float(gammas[i]), float(betas[j]))
    best_value = float(grid[i, j])
    path = [(best_cell[0], best_cell[1], best_value)]
    refined = (best_cell[0], best_cell[1], best_value)
    if refine:

        def f(x):
            return qaoa_expectation(QaoaParams([x[0]], [x[1]]), ising_diag)

        def callback(intermediate_result):
            x = intermediate_result.x
            path.append((float(x[0]), float(x[1]), float(intermediate_result.fun)))

        res = minimize(
            f,
            np.array(best_cell),
            method="Nelder-Mead",
            callback=callback,
            options={"maxiter": max_refine_iters, "xatol": 1e-9, "fatol": 1e-13},
        )
        if res.fun < best_value:
            refined = (float(res.x[0]), float(res.x[1]), float(res.fun))
    return GridSearchResult(gammas, betas, grid, best_cell, best_value, refined, path)


def coupling_edges(problem: QuboProblem) -> int:
    """Number of pairs ``i < j`` with a nonzero coupling."""
    return int(np.count_nonzero(np.triu(problem.a, 1)))


def qaoa_cnot_count(problem: QuboProblem, p: int = 1) -> int:
    """Two CNOTs per coupling per layer."""
    if p < 0:
        raise InvalidInputError(f"p must be >= 0, got {p}")
    return 2 * coupling_edges(problem) * p
