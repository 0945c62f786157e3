"""Perturbed Ising Hamiltonian ``H = H_ising + gamma*I - lambda * sum_i X_i``.

The operator is kept matrix-free: a diagonal vector plus uniform hopping
between basis states one bit flip apart (the edges of the n-cube).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CapacityError, InvalidInputError
from .qubo import ProblemKind, QuboProblem, ising_diagonal

DENSE_LIMIT = 14


@dataclass(frozen=True, eq=False)
class PerturbedHamiltonian:
    n: int
    ising_diag: np.ndarray
    gamma: float
    lambda_: float

    def __post_init__(self):
        if not np.isfinite(self.gamma):
            raise InvalidInputError(f"gamma must be finite, got {self.gamma}")
        if not (np.isfinite(self.lambda_) and self.lambda_ > 0):
            raise InvalidInputError(f"lambda must be finite and > 0, got {self.lambda_}")
        diag = np.array(self.ising_diag, dtype=np.float64)
        if diag.shape != (1 << self.n,):
            raise InvalidInputError(f"ising_diag must have length 2**{self.n}")
        diag.setflags(write=False)
        object.__setattr__(self, "ising_diag", diag)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "lambda_", float(self.lambda_))

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def diagonal(self) -> np.ndarray:
        """Full diagonal ``ising_diag + gamma``."""
        return self.ising_diag + self.gamma

    def __matmul__(self, v):
        return apply(self, v)


@dataclass(frozen=True)
class ValidityReport:
    diag_nonnegative: bool
    min_eigenvalue: float
    positive_semidefinite: bool
    inverse_entrywise_nonnegative: Optional[bool]
    valid: bool


def build(problem: QuboProblem, gamma: float, lambda_: float) -> PerturbedHamiltonian:
    if not lambda_ > 0:
        raise InvalidInputError(f"lambda must be > 0, got {lambda_}")
    return PerturbedHamiltonian(problem.n, ising_diagonal(problem), gamma, lambda_)


def hop(v: np.ndarray, n: int) -> np.ndarray:
    """Sum of ``v`` over the n single-bit-flip neighbours: ``sum_k v[J ^ 2**k]``."""
    out = np.zeros_like(v)
    for k in range(n):
        blocks = v.reshape(-1, 2, 1 << k)
        out.reshape(-1, 2, 1 << k)[...] += blocks[:, ::-1, :]
    return out


def apply(h: PerturbedHamiltonian, v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (h.dim,):
        raise InvalidInputError(f"vector of length {v.shape} does not match dimension {h.dim}")
    return h.diagonal * v - h.lambda_ * hop(v, h.n)


def dense_matrix(h: PerturbedHamiltonian) -> np.ndarray:
    if h.n > DENSE_LIMIT:
        raise CapacityError(f"dense materialization supports n <= {DENSE_LIMIT}, got {h.n}")
    idx = np.arange(h.dim)
    m = np.diag(h.diagonal)
    for k in range(h.n):
        m[idx, idx ^ (1 << k)] = -h.lambda_
    return m


def validity_check(h: PerturbedHamiltonian, check_inverse: bool = False) -> ValidityReport:
    """Check the conditions under which the landscape bounds eigenstates.

    Off-diagonals are ``-lambda < 0`` by construction, so only the diagonal,
    positive semidefiniteness and (optionally) inverse positivity are tested.
    """
    if h.n > DENSE_LIMIT:
        raise CapacityError(f"validity check supports n <= {DENSE_LIMIT}, got {h.n}")
    diag = h.diagonal
    diag_ok = bool(diag.min() >= 0)
    m = dense_matrix(h)
    min_eig = float(np.linalg.eigvalsh(m)[0])
    tol_psd = 1e-10 * float(np.abs(diag).max())
    psd = min_eig >= -tol_psd
    inv_ok = None
    if check_inverse:
        try:
            inv = np.linalg.solve(m, np.eye(h.dim))
            inv_ok = bool(np.all(np.isfinite(inv)) and inv.min() >= -1e-9)
        except np.linalg.LinAlgError:
            inv_ok = False
    valid = diag_ok and psd and (inv_ok is not False)
    return ValidityReport(diag_ok, min_eig, psd, inv_ok, valid)


def gamma_heuristic_generic(problem: QuboProblem) -> float:
    """``1.1 * sum_ij |a_ij|``: offsets the crude lower bound ``-sum_ij |a_ij|``."""
    return 1.1 * float(np.abs(problem.a).sum())


def gamma_heuristic_maxcut(n: int) -> float:
    """Edge count of a 3-regular graph plus one."""
    if n % 2:
        raise InvalidInputError(f"3-regular graphs need an even n, got {n}")
    return 3 * n / 2 + 1


LAMBDA_RATIO = {ProblemKind.RANDOM_DENSE: 0.07, ProblemKind.MAXCUT_3REGULAR: 0.03, ProblemKind.CUSTOM: 0.07}


def heuristic_parameters(problem: QuboProblem, rule: str = "auto"):
    """Default ``(gamma, lambda)`` pair for an instance.

    ``rule`` is ``"generic"``, ``"maxcut"`` or ``"auto"`` (maxcut for 3-regular
    instances). lambda is a fixed fraction of gamma: 0.07 with the generic
    rule and 0.03 with the MaxCut rule.
    """
    if rule == "auto":
        rule = "maxcut" if problem.kind is ProblemKind.MAXCUT_3REGULAR else "generic"
    if rule == "maxcut":
        gamma = gamma_heuristic_maxcut(problem.n)
        return gamma, LAMBDA_RATIO[ProblemKind.MAXCUT_3REGULAR] * gamma
    if rule == "generic":
        gamma = gamma_heuristic_generic(problem)
        return gamma, LAMBDA_RATIO[ProblemKind.RANDOM_DENSE] * gamma
    raise InvalidInputError(f"unknown gamma rule {rule!r}")
