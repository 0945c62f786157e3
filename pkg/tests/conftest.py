import itertools

import numpy as np
import pytest

from landscape_qubo.qubo import QuboProblem, generate_maxcut_3regular, generate_random_qubo


def kron_all(mats):
    out = np.array([[1.0]])
    for m in mats:
        out = np.kron(out, m)
    return out


def sigma_x(n, i):
    """X on variable i (little-endian: variable 0 is the last Kronecker factor)."""
    eye, x = np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]])
    return kron_all([x if q == i else eye for q in reversed(range(n))])


def cost_by_enumeration(a):
    """Cost vector indexed by J = sum x_i 2^i, built from itertools."""
    n = a.shape[0]
    out = np.empty(1 << n)
    for bits in itertools.product((0, 1), repeat=n):
        x = np.array(bits[::-1], dtype=float)  # bits[-1] is variable 0
        j = int(sum(int(b) << i for i, b in enumerate(x)))
        out[j] = x @ a @ x
    return out


def dense_oracle(a, gamma, lam):
    """H = diag(C) + gamma - lam sum_i X_i via Kronecker products."""
    n = a.shape[0]
    h = np.diag(cost_by_enumeration(a) + gamma)
    for i in range(n):
        h -= lam * sigma_x(n, i)
    return h


@pytest.fixture
def toy1():
    return QuboProblem(np.array([[-1.0]]))


@pytest.fixture
def toy2():
    return QuboProblem(np.array([[1.0, -2.0], [-2.0, 1.0]]))


@pytest.fixture(params=[3, 5, 6])
def random_problem(request):
    return generate_random_qubo(request.param, 11 + request.param)


@pytest.fixture
def maxcut6():
    return generate_maxcut_3regular(6, 3)


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one acceptance line: ``record(number, passed, detail)``."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def record(number, passed, detail):
        lines.append((number, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = sorted(config.stash.get(ACCEPTANCE_KEY, []), key=lambda x: x[0])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in lines:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number:>4}: {detail}")
