"""QUBO problem definitions, cost evaluation, instance generators and the
exhaustive brute-force oracle.

Bit ordering is little-endian throughout the package: variable ``i`` (0-based)
is bit ``i`` of the Fock-basis index, so the single-flip neighbour of index
``J`` along variable ``k`` is ``J ^ (1 << k)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CapacityError, InvalidInputError

SOFT_LIMIT = 24
TIE_TOL = 1e-9
MAX_PAIRING_ATTEMPTS = 1000


class ProblemKind(str, enum.Enum):
    RANDOM_DENSE = "random_dense"
    MAXCUT_3REGULAR = "maxcut_3regular"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class QuboProblem:
    """Symmetric QUBO matrix ``a`` defining ``C(x) = x^T a x``.

    The matrix is symmetrized on construction, which leaves the cost
    function unchanged.
    """

    a: np.ndarray
    kind: ProblemKind = ProblemKind.CUSTOM
    seed: Optional[int] = None
    edges: Optional[tuple] = None

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidInputError(f"QUBO matrix must be square and non-empty, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("QUBO matrix has non-finite entries")
        if not np.array_equal(a, a.T):
            a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        kind = ProblemKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ProblemKind.MAXCUT_3REGULAR:
            if self.edges is None:
                raise InvalidInputError("maxcut_3regular problems need an edge list")
            object.__setattr__(self, "edges", tuple(tuple(int(v) for v in e) for e in self.edges))
        elif self.edges is not None:
            raise InvalidInputError("edge list is only allowed for maxcut_3regular problems")

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def __eq__(self, other):
        if not isinstance(other, QuboProblem):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.seed == other.seed
            and self.edges == other.edges
            and np.array_equal(self.a, other.a)
        )

    __hash__ = None


@dataclass(frozen=True)
class Bitstring:
    """Assignment of ``n`` binary variables together with its basis index."""

    bits: tuple
    index: int

    @classmethod
    def from_index(cls, index: int, n: int) -> "Bitstring":
        index = int(index)
        if not 0 <= index < (1 << n):
            raise InvalidInputError(f"index {index} out of range for n={n}")
        return cls(tuple((index >> i) & 1 for i in range(n)), index)

    @classmethod
    def from_bits(cls, bits) -> "Bitstring":
        bits = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in bits):
            raise InvalidInputError(f"bits must be 0/1, got {bits}")
        return cls(bits, sum(b << i for i, b in enumerate(bits)))

    @property
    def n(self) -> int:
        return len(self.bits)

    def complement(self) -> "Bitstring":
        return Bitstring.from_bits(1 - b for b in self.bits)

    def label(self) -> str:
        """Variables written left to right, x_1 first."""
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True)
class SolutionRecord:
    optimal_cost: float
    optimizers: list
    spectrum: Optional[list] = field(default=None)


def _as_bitstring(x, n=None) -> Bitstring:
    if isinstance(x, Bitstring):
        return x
    if isinstance(x, (int, np.integer)):
        if n is None:
            raise InvalidInputError("an integer bitstring needs an explicit length")
        return Bitstring.from_index(int(x), n)
    return Bitstring.from_bits(x)


def qubo_cost(problem: QuboProblem, x) -> float:
    """Evaluate ``x^T a x`` for one bitstring.

    The summation order matches :func:`ising_diagonal` term for term, so the
    two agree bit for bit.
    """
    x = _as_bitstring(x, problem.n)
    if x.n != problem.n:
        raise InvalidInputError(f"bitstring has length {x.n}, problem has n={problem.n}")
    a = problem.a
    total = 0.0
    for i in range(problem.n):
        for j in range(problem.n):
            total += float(a[i, j]) * float(x.bits[i] & x.bits[j])
    return total


def basis_bits(n: int) -> np.ndarray:
    """Bit table of shape ``(2**n, n)``; row J holds the bits of index J."""
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.int8)


def ising_diagonal(problem: QuboProblem) -> np.ndarray:
    """Computational-basis diagonal of the Ising Hamiltonian.

    Entry J is the QUBO cost of the bitstring with index J.
    """
    n = problem.n
    if n > SOFT_LIMIT:
        raise CapacityError(f"n={n} exceeds the supported limit of {SOFT_LIMIT}")
    idx = np.arange(1 << n, dtype=np.int64)
    bits = [((idx >> i) & 1).astype(np.float64) for i in range(n)]
    a = problem.a
    diag = np.zeros(1 << n)
    for i in range(n):
        for j in range(n):
            diag += float(a[i, j]) * (bits[i] * bits[j])
    return diag


def group_levels(costs: np.ndarray, tol: float = TIE_TOL) -> list:
    """Group costs into distinct levels, lowest first.

    Returns a list of index arrays; costs within ``tol`` of the first member of
    a level are merged into it.
    """
    order = np.argsort(costs, kind="stable")
    sorted_costs = costs[order]
    levels = []
    start = 0
    for k in range(1, len(sorted_costs) + 1):
        if k == len(sorted_costs) or sorted_costs[k] - sorted_costs[start] > tol:
            levels.append(np.sort(order[start:k]))
            start = k
    return levels


def brute_force_solve(problem: QuboProblem, with_spectrum: bool = False) -> SolutionRecord:
    """Exhaustively scan all ``2**n`` bitstrings."""
    if problem.n > SOFT_LIMIT:
        raise CapacityError(f"brute force supports n <= {SOFT_LIMIT}, got {problem.n}")
    diag = ising_diagonal(problem)
    best = float(diag.min())
    # Optimizers share the exact minimum; near-ties only merge in the spectrum.
    opt_idx = np.flatnonzero(diag == best)
    optimizers = [Bitstring.from_index(j, problem.n) for j in opt_idx]
    spectrum = None
    if with_spectrum:
        spectrum = [(float(diag[lvl].min()), len(lvl)) for lvl in group_levels(diag)]
    return SolutionRecord(best, optimizers, spectrum)


def generate_random_qubo(n: int, seed: int) -> QuboProblem:
    """Dense instance with upper-triangle entries i.i.d. uniform on [-1, 1]."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if n > SOFT_LIMIT:
        raise CapacityError(f"n={n} exceeds the supported limit of {SOFT_LIMIT}")
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n)
    a = np.zeros((n, n))
    a[iu] = rng.uniform(-1.0, 1.0, size=len(iu[0]))
    a = np.triu(a) + np.triu(a, 1).T
    return QuboProblem(a, ProblemKind.RANDOM_DENSE, seed=int(seed))


def _pair_stubs(n: int, degree: int, rng: np.random.Generator):
    stubs = np.repeat(np.arange(n), degree)
    rng.shuffle(stubs)
    edges = set()
    for u, v in zip(stubs[0::2], stubs[1::2]):
        u, v = (int(u), int(v)) if u < v else (int(v), int(u))
        if u == v or (u, v) in edges:
            return None
        edges.add((u, v))
    return sorted(edges)


def maxcut_matrix(n: int, edges) -> np.ndarray:
    """Minimization encoding ``C(x) = -cut(x)`` of unweighted MaxCut."""
    a = np.zeros((n, n))
    for i, j in edges:
        a[i, i] -= 1.0
        a[j, j] -= 1.0
        a[i, j] += 1.0
        a[j, i] += 1.0
    return a


def generate_maxcut_3regular(n: int, seed: int) -> QuboProblem:
    """Random simple 3-regular graph (pairing model) encoded as a QUBO."""
    if n < 4 or n % 2:
        raise InvalidInputError(f"3-regular graphs need an even n >= 4, got {n}")
    if n > SOFT_LIMIT:
        raise CapacityError(f"n={n} exceeds the supported limit of {SOFT_LIMIT}")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_PAIRING_ATTEMPTS):
        edges = _pair_stubs(n, 3, rng)
        if edges is not None:
            break
    else:
        raise InvalidInputError(f"no simple 3-regular graph found after {MAX_PAIRING_ATTEMPTS} attempts")
    return QuboProblem(maxcut_matrix(n, edges), ProblemKind.MAXCUT_3REGULAR, seed=int(seed), edges=tuple(edges))


def cut_value(edges, x: Bitstring) -> int:
    return sum(1 for i, j in edges if x.bits[i] != x.bits[j])


def hamming_distance(x1, x2) -> int:
    if isinstance(x1, (int, np.integer)) and isinstance(x2, (int, np.integer)):
        return int(x1 ^ x2).bit_count()
    b1, b2 = _as_bitstring(x1), _as_bitstring(x2)
    if b1.n != b2.n:
        raise InvalidInputError(f"length mismatch: {b1.n} vs {b2.n}")
    return sum(u != v for u, v in zip(b1.bits, b2.bits))


def popcount(idx: np.ndarray) -> np.ndarray:
    """Vectorized bit count for non-negative int64 arrays."""
    idx = np.asarray(idx, dtype=np.int64)
    count = np.zeros_like(idx)
    while np.any(idx):
        count += idx & 1
        idx = idx >> 1
    return count
