"""Localization landscape ``u`` solving ``H u = 1`` and quantities derived
from it.

The right-hand side is the all-ones vector rather than the normalized
``|+>`` state. The two differ by the scalar ``2**(-n/2)``, which drops out of
every normalized quantity (sampling probabilities, Hamming profiles), while
the all-ones convention keeps ``u_J`` in the units of the spectral sum
``sum_b <J|phi_b> / E_b * sum_m <m|phi_b>``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np

from .errors import BoundNotApplicableError, CapacityError, InvalidInputError, NumericalError, SingularSpectrumError
from .hamiltonian import PerturbedHamiltonian, apply, dense_matrix, validity_check
from .qubo import Bitstring, popcount

SPECTRAL_LIMIT = 12
DEFAULT_TOL = 1e-10
MAX_RESTARTS = 5


@dataclass(frozen=True, eq=False)
class LandscapeVector:
    u: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool = True

    @property
    def n(self) -> int:
        return int(self.u.size).bit_length() - 1


class DistributionSource(str, enum.Enum):
    EXACT_LANDSCAPE = "exact_landscape"
    ANSATZ_STATE = "ansatz_state"
    QAOA_STATE = "qaoa_state"
    GROUND_STATE_OF_H = "ground_state_of_h"
    UNIFORM = "uniform"


@dataclass(frozen=True, eq=False)
class SamplingDistribution:
    probs: np.ndarray
    source: DistributionSource = DistributionSource.EXACT_LANDSCAPE

    @property
    def n(self) -> int:
        return int(self.probs.size).bit_length() - 1


@dataclass(frozen=True, eq=False)
class HammingProfile:
    by_distance: np.ndarray
    per_bitstring: Optional[list] = field(default=None)


@dataclass(frozen=True)
class BoundReport:
    """Outcome of checking ``|phi_b(J)| <= |E_b| * ||phi_b||_inf * u_J``."""

    energies: list
    max_violation: float
    min_slack: list
    mean_slack: list
    violations: int

    @property
    def holds(self) -> bool:
        return self.violations == 0


def _residual(h, u):
    return float(np.linalg.norm(apply(h, u) - 1.0))


def conjugate_gradient(matvec, b, tol=DEFAULT_TOL, max_iter=None, precond=None):
    """Conjugate gradient from a zero initial guess.

    Stops when the recursive residual drops below ``tol * ||b||``, after
    ``max_iter`` iterations, or when a non-positive curvature direction shows
    the operator is not positive definite. Returns ``(x, iterations,
    converged)``; the best iterate by recursive residual is returned when the
    run does not converge.
    """
    b = np.asarray(b, dtype=np.float64)
    if max_iter is None:
        max_iter = 10 * b.size
    x = np.zeros_like(b)
    r = b.copy()
    z = precond(r) if precond is not None else r
    p = z.copy()
    rz = float(r @ z)
    threshold = tol * float(np.linalg.norm(b))
    res = float(np.linalg.norm(r))
    best_x, best_res = x.copy(), res
    it = 0
    while res > threshold and it < max_iter:
        ap = matvec(p)
        pap = float(p @ ap)
        if not pap > 0:
            return best_x, it, False
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        it += 1
        res = float(np.linalg.norm(r))
        if res < best_res:
            best_x, best_res = x.copy(), res
        z = precond(r) if precond is not None else r
        rz_next = float(r @ z)
        p *= rz_next / rz
        p += z
        rz = rz_next
    if res <= threshold:
        return x, it, True
    return best_x, it, False


def solve_landscape(
    h: PerturbedHamiltonian,
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
    jacobi: bool = False,
    diagonal_only: bool = False,
) -> LandscapeVector:
    """Solve ``H u = 1`` matrix-free.

    ``diagonal_only`` drops the hopping term (the lambda -> 0 limit) and returns
    ``1 / (ising_diag + gamma)`` directly. Non-convergence is reported through
    ``converged=False`` with the best iterate, never raised.
    """
    if not tol > 0:
        raise InvalidInputError(f"tol must be > 0, got {tol}")
    ones = np.ones(h.dim)
    if diagonal_only:
        d = h.diagonal
        if np.any(d == 0):
            raise NumericalError(f"zero diagonal entry at index {int(np.flatnonzero(d == 0)[0])}")
        u = 1.0 / d
        res = float(np.linalg.norm(d * u - 1.0))
        return LandscapeVector(u, res, 0, True)
    if max_iter is None:
        max_iter = 10 * h.dim
    precond = None
    if jacobi:
        inv_d = 1.0 / h.diagonal
        precond = lambda r: inv_d * r  # noqa: E731
    threshold = tol * np.sqrt(h.dim)
    u = np.zeros(h.dim)
    total_it = 0
    # Recursive residuals drift from true ones; restart on the true residual
    # until it meets the threshold.
    for _ in range(MAX_RESTARTS):
        r = ones - apply(h, u)
        rnorm = float(np.linalg.norm(r))
        if rnorm <= threshold or total_it >= max_iter:
            break
        du, it, ok = conjugate_gradient(
            lambda v: apply(h, v), r, threshold / rnorm, max_iter - total_it, precond
        )
        u += du
        total_it += it
        if not ok:
            break
    res = _residual(h, u)
    return LandscapeVector(u, res, total_it, bool(res <= threshold))


def dense_landscape(h: PerturbedHamiltonian) -> LandscapeVector:
    """Direct LU solve of the materialized system; a test oracle."""
    u = np.linalg.solve(dense_matrix(h), np.ones(h.dim))
    return LandscapeVector(u, _residual(h, u), 0, True)


def spectral_landscape(h: PerturbedHamiltonian) -> LandscapeVector:
    """Landscape assembled from the full eigensystem of ``H``."""
    if h.n > SPECTRAL_LIMIT:
        raise CapacityError(f"spectral landscape supports n <= {SPECTRAL_LIMIT}, got {h.n}")
    energies, phi = np.linalg.eigh(dense_matrix(h))
    small = np.abs(energies) < 1e-12
    if np.any(small):
        raise SingularSpectrumError(f"eigenvalue {energies[small][0]:.3e} too close to zero")
    weights = phi.sum(axis=0) / energies
    u = phi @ weights
    return LandscapeVector(u, _residual(h, u), 0, True)


def effective_potential(lv) -> np.ndarray:
    u = lv.u if isinstance(lv, LandscapeVector) else np.asarray(lv)
    zero = np.flatnonzero(u == 0)
    if zero.size:
        raise ZeroDivisionError(f"landscape vanishes at index {int(zero[0])}")
    return 1.0 / u


def sampling_distribution(v, source=DistributionSource.EXACT_LANDSCAPE) -> SamplingDistribution:
    """Born-rule probabilities ``|v_J|^2 / ||v||^2``."""
    if isinstance(v, LandscapeVector):
        v = v.u
    w = np.abs(np.asarray(v)) ** 2
    total = w.sum()
    if not total > 0:
        raise InvalidInputError("cannot normalize a zero vector")
    return SamplingDistribution(w / total, DistributionSource(source))


def uniform_distribution(n: int) -> SamplingDistribution:
    return SamplingDistribution(np.full(1 << n, 1.0 / (1 << n)), DistributionSource.UNIFORM)


def sample_bitstrings(dist: SamplingDistribution, shots: int, seed) -> np.ndarray:
    """Draw basis indices i.i.d. from ``dist`` by inverse CDF.

    Returns an int64 array of indices; use :meth:`Bitstring.from_index` to
    expand individual draws.
    """
    if shots < 1:
        raise InvalidInputError(f"shots must be >= 1, got {shots}")
    cdf = np.cumsum(dist.probs)
    rng = np.random.default_rng(seed)
    draws = rng.random(shots) * cdf[-1]
    idx = np.searchsorted(cdf, draws, side="right")
    return np.minimum(idx, cdf.size - 1).astype(np.int64)


def verify_bound(h: PerturbedHamiltonian, lv: LandscapeVector, k: int = 4, slack: float = 1e-9) -> BoundReport:
    """Check the landscape amplitude bound on the ``k`` lowest eigenstates."""
    if h.n > SPECTRAL_LIMIT:
        raise CapacityError(f"bound check supports n <= {SPECTRAL_LIMIT}, got {h.n}")
    report = validity_check(h)
    if not report.valid:
        raise BoundNotApplicableError(
            f"operator is not a valid landscape operator (min eigenvalue {report.min_eigenvalue:.3e})"
        )
    energies, phi = np.linalg.eigh(dense_matrix(h))
    k = min(k, h.dim)
    worst = -np.inf
    violations = 0
    min_slack, mean_slack = [], []
    for b in range(k):
        amp = np.abs(phi[:, b])
        bound = abs(energies[b]) * amp.max() * lv.u
        gap = bound - amp
        violations += int(np.sum(gap < -slack))
        worst = max(worst, float(np.max(-gap)))
        min_slack.append(float(gap.min()))
        mean_slack.append(float(gap.mean()))
    return BoundReport([float(e) for e in energies[:k]], worst, min_slack, mean_slack, violations)


def hamming_profile(dist: SamplingDistribution, x_star, per_bitstring: bool = False) -> HammingProfile:
    n = dist.n
    x_idx = x_star.index if isinstance(x_star, Bitstring) else int(x_star)
    if isinstance(x_star, Bitstring) and x_star.n != n:
        raise InvalidInputError(f"x* has length {x_star.n}, distribution covers n={n}")
    d = popcount(np.arange(dist.probs.size) ^ x_idx)
    by_distance = np.bincount(d, weights=dist.probs, minlength=n + 1)
    pairs = None
    if per_bitstring:
        pairs = [(Bitstring.from_index(j, n), float(p)) for j, p in enumerate(dist.probs)]
    return HammingProfile(by_distance, pairs)


def binomial_profile(n: int) -> np.ndarray:
    return np.array([comb(n, d) for d in range(n + 1)], dtype=np.float64) / (1 << n)


def argmax_hamming(dist: SamplingDistribution, x_star) -> int:
    """Hamming distance from ``x_star`` to the most probable index (lowest on ties)."""
    x_idx = x_star.index if isinstance(x_star, Bitstring) else int(x_star)
    best = int(np.argmax(dist.probs))
    return (best ^ x_idx).bit_count()


def level_probabilities(dist: SamplingDistribution, levels) -> list:
    """Total probability carried by each group of basis indices."""
    return [float(dist.probs[np.asarray(lvl)].sum()) for lvl in levels]
