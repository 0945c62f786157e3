"""Small statevector kernels for the ansatz and QAOA circuits.

States are plain numpy arrays of length ``2**n``: float64 for the real-amplitude
ansatz, complex128 for QAOA. Qubit ``q`` is bit ``q`` of the basis index.
Gates return new arrays and never mutate their input.
"""
from __future__ import annotations

from functools import lru_cache
from math import cos, sin

import numpy as np

from .errors import CapacityError, InvalidInputError
from .hamiltonian import PerturbedHamiltonian, apply, hop
from .qubo import SOFT_LIMIT


def num_qubits(state: np.ndarray) -> int:
    n = int(state.size).bit_length() - 1
    if state.ndim != 1 or state.size != 1 << n:
        raise InvalidInputError(f"state length {state.size} is not a power of two")
    return n


def _check_qubit(q, n):
    if not 0 <= q < n:
        raise IndexError(f"qubit {q} out of range for {n} qubits")


def plus_state(n: int) -> np.ndarray:
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if n > SOFT_LIMIT:
        raise CapacityError(f"n={n} exceeds the supported limit of {SOFT_LIMIT}")
    return np.full(1 << n, 2.0 ** (-n / 2))


def basis_state(n: int, index: int, dtype=np.float64) -> np.ndarray:
    s = np.zeros(1 << n, dtype=dtype)
    s[index] = 1.0
    return s


def apply_1q(state: np.ndarray, qubit: int, m) -> np.ndarray:
    """Apply a 2x2 matrix ``m`` to ``qubit``."""
    n = num_qubits(state)
    _check_qubit(qubit, n)
    view = state.reshape(-1, 2, 1 << qubit)
    a0, a1 = view[:, 0, :], view[:, 1, :]
    out = np.empty_like(view, dtype=np.result_type(state, np.asarray(m)))
    out[:, 0, :] = m[0][0] * a0 + m[0][1] * a1
    out[:, 1, :] = m[1][0] * a0 + m[1][1] * a1
    return out.reshape(-1)


def apply_ry(state: np.ndarray, qubit: int, theta: float) -> np.ndarray:
    """``R_y(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]``; stays real."""
    c, s = cos(theta / 2), sin(theta / 2)
    return apply_1q(state, qubit, ((c, -s), (s, c)))


def apply_h(state: np.ndarray, qubit: int) -> np.ndarray:
    r = 2.0 ** -0.5
    return apply_1q(state, qubit, ((r, r), (r, -r)))


def hadamard_layer(state: np.ndarray) -> np.ndarray:
    for q in range(num_qubits(state)):
        state = apply_h(state, q)
    return state


def apply_rx_layer(state: np.ndarray, beta: float) -> np.ndarray:
    """``exp(-i beta sum_q X_q)``, i.e. ``R_x(2 beta)`` on every qubit."""
    c, s = cos(beta), -1j * sin(beta)
    m = ((c, s), (s, c))
    for q in range(num_qubits(state)):
        state = apply_1q(state, q, m)
    return state


def apply_phase(state: np.ndarray, diag: np.ndarray, gamma: float) -> np.ndarray:
    """``exp(-i gamma D)`` for a diagonal operator with entries ``diag``."""
    return state * np.exp(-1j * gamma * np.asarray(diag))


@lru_cache(maxsize=256)
def _cnot_perm(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return np.where((idx >> control) & 1, idx ^ (1 << target), idx)


def apply_cnot(state: np.ndarray, control: int, target: int) -> np.ndarray:
    n = num_qubits(state)
    _check_qubit(control, n)
    _check_qubit(target, n)
    if control == target:
        raise InvalidInputError("control and target must differ")
    return state[_cnot_perm(n, control, target)]


def norm(state: np.ndarray) -> float:
    return float(np.linalg.norm(state))


def expectation_perturbed(h: PerturbedHamiltonian, state: np.ndarray) -> float:
    """``<psi|H|psi>`` for a real state via one matrix-free application."""
    state = np.asarray(state)
    if state.shape != (h.dim,):
        raise InvalidInputError(f"state length {state.size} does not match dimension {h.dim}")
    return float(state @ apply(h, state))


def transverse_expectation(state: np.ndarray) -> float:
    """``sum_i <X_i>`` computed from the bit-flip neighbour sum."""
    n = num_qubits(state)
    return float(np.real(np.vdot(state, hop(state, n))))


def expectation_ising(ising_diag, dist_or_state) -> float:
    """``sum_J p_J * ising_diag[J]`` for a distribution or a (normalized) state."""
    probs = getattr(dist_or_state, "probs", None)
    if probs is None:
        probs = np.abs(np.asarray(dist_or_state)) ** 2
    ising_diag = np.asarray(ising_diag)
    if probs.shape != ising_diag.shape:
        raise InvalidInputError(f"length mismatch: {probs.size} vs {ising_diag.size}")
    return float(probs @ ising_diag)


def overlap_plus(state: np.ndarray) -> float:
    """``<psi|+>`` for a real state."""
    n = num_qubits(state)
    return float(state.sum() * 2.0 ** (-n / 2))
