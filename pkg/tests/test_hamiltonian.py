import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landscape_qubo.errors import CapacityError, InvalidInputError
from landscape_qubo.hamiltonian import (
    apply,
    build,
    dense_matrix,
    gamma_heuristic_generic,
    gamma_heuristic_maxcut,
    heuristic_parameters,
    hop,
    validity_check,
)
from landscape_qubo.qubo import (
    QuboProblem,
    brute_force_solve,
    generate_maxcut_3regular,
    generate_random_qubo,
    ising_diagonal,
)
from landscape_qubo.statevector import expectation_ising, transverse_expectation

from conftest import dense_oracle


class TestBuild:
    def test_n1_dense(self, toy1):
        h = build(toy1, 2.0, 0.5)
        np.testing.assert_array_equal(dense_matrix(h), [[2.0, -0.5], [-0.5, 1.0]])

    @pytest.mark.parametrize("lam", [0.0, -0.1, np.inf])
    def test_rejects_bad_lambda(self, toy1, lam):
        with pytest.raises(InvalidInputError):
            build(toy1, 1.0, lam)

    def test_any_finite_gamma_allowed(self, toy1):
        build(toy1, -100.0, 0.1)

    def test_rejects_infinite_gamma(self, toy1):
        with pytest.raises(InvalidInputError):
            build(toy1, np.inf, 0.1)

    def test_matches_kronecker_oracle(self, random_problem):
        h = build(random_problem, 1.3, 0.4)
        np.testing.assert_allclose(dense_matrix(h), dense_oracle(random_problem.a, 1.3, 0.4), atol=1e-12)

    def test_row_structure(self):
        h = build(generate_random_qubo(4, 0), 3.0, 0.25)
        m = dense_matrix(h)
        for j in range(16):
            off = np.delete(m[j], j)
            assert np.count_nonzero(off) == 4
            assert set(off[off != 0]) == {-0.25}
            assert (np.count_nonzero(m[j]) - 1) <= 4  # Fock graph max degree n

    def test_symmetric_and_row_sums(self, random_problem):
        h = build(random_problem, 2.0, 0.3)
        m = dense_matrix(h)
        assert np.array_equal(m, m.T)
        np.testing.assert_allclose(m.sum(axis=1), h.ising_diag + 2.0 - random_problem.n * 0.3, atol=1e-12)

    def test_dense_capacity(self):
        h = build(QuboProblem(np.zeros((15, 15))), 1.0, 0.1)
        with pytest.raises(CapacityError):
            dense_matrix(h)


class TestApply:
    def test_zero_vector(self, random_problem):
        h = build(random_problem, 1.0, 0.2)
        assert not apply(h, np.zeros(h.dim)).any()

    def test_diagonal_part(self, random_problem):
        # Removing the hopping term leaves (E_J + gamma) v_J.
        h = build(random_problem, 1.5, 0.2)
        v = np.random.default_rng(0).normal(size=h.dim)
        np.testing.assert_allclose(apply(h, v) + 0.2 * hop(v, h.n), (h.ising_diag + 1.5) * v, atol=1e-13)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_matches_dense(self, n):
        rng = np.random.default_rng(n)
        h = build(generate_random_qubo(n, n), 2.0, 0.37)
        m = dense_matrix(h)
        for _ in range(20):
            v = rng.normal(size=h.dim)
            ref = m @ v
            assert np.linalg.norm(apply(h, v) - ref) <= 1e-12 * np.linalg.norm(ref)

    def test_bilinear_symmetry(self, random_problem):
        h = build(random_problem, 0.7, 0.9)
        rng = np.random.default_rng(1)
        u, v = rng.normal(size=(2, h.dim))
        assert u @ (h @ v) == pytest.approx(v @ (h @ u), rel=1e-10)

    def test_length_mismatch(self, toy2):
        with pytest.raises(InvalidInputError):
            apply(build(toy2, 1.0, 0.1), np.ones(3))

    def test_expectation_decomposition(self, random_problem):
        h = build(random_problem, 1.2, 0.35)
        psi = np.random.default_rng(4).normal(size=h.dim)
        psi /= np.linalg.norm(psi)
        total = expectation_ising(h.ising_diag, psi) + 1.2 - 0.35 * transverse_expectation(psi)
        assert psi @ apply(h, psi) == pytest.approx(total, abs=1e-10)


class TestValidity:
    def test_n1_valid(self, toy1):
        r = validity_check(build(toy1, 2.0, 0.5), check_inverse=True)
        assert r.valid and r.inverse_entrywise_nonnegative
        # trace 3, determinant 1.75
        assert r.min_eigenvalue == pytest.approx((3 - np.sqrt(9 - 4 * 1.75)) / 2, abs=1e-14)

    def test_offset_small_lambda_valid(self, random_problem):
        gamma = -ising_diagonal(random_problem).min()
        r = validity_check(build(random_problem, gamma + 0.5, 0.01), check_inverse=True)
        assert r.valid and r.diag_nonnegative and r.positive_semidefinite

    def test_zero_gamma_not_psd(self):
        p = generate_random_qubo(6, 3)
        assert brute_force_solve(p).optimal_cost < 0
        h = build(p, 0.0, 1e-3)
        assert np.linalg.eigvalsh(dense_oracle(p.a, 0.0, 1e-3)).min() < 0
        r = validity_check(h)
        assert not r.positive_semidefinite and not r.diag_nonnegative and not r.valid

    def test_large_lambda_loses_inverse_positivity_or_psd(self):
        p = generate_random_qubo(4, 0)
        gamma = -ising_diagonal(p).min() + 0.1
        r = validity_check(build(p, gamma, 5.0), check_inverse=True)
        assert not r.valid

    @pytest.mark.parametrize("seed", range(10))
    def test_m_matrix_property(self, seed):
        p = generate_random_qubo(6, seed)
        gamma = -ising_diagonal(p).min() + 0.3
        r = validity_check(build(p, gamma, 0.2), check_inverse=True)
        if r.diag_nonnegative and r.min_eigenvalue > 0:
            assert r.inverse_entrywise_nonnegative

    def test_capacity(self):
        with pytest.raises(CapacityError):
            validity_check(build(QuboProblem(np.zeros((15, 15))), 1.0, 0.1))


class TestHeuristics:
    def test_generic_examples(self, toy1, toy2):
        assert gamma_heuristic_generic(toy1) == pytest.approx(1.1)
        assert gamma_heuristic_generic(toy2) == pytest.approx(6.6)

    @pytest.mark.parametrize("seed", range(100))
    def test_generic_bounds_optimum(self, seed):
        p = generate_random_qubo(1 + seed % 10, seed)
        assert gamma_heuristic_generic(p) >= -brute_force_solve(p).optimal_cost

    def test_maxcut_values(self):
        assert gamma_heuristic_maxcut(10) == 16.0
        assert gamma_heuristic_maxcut(4) == 7.0

    def test_maxcut_odd_rejected(self):
        with pytest.raises(InvalidInputError):
            gamma_heuristic_maxcut(7)

    @pytest.mark.parametrize("n,seed", [(4, 0), (6, 1), (8, 2), (10, 3)])
    def test_maxcut_bounds_optimum(self, n, seed):
        p = generate_maxcut_3regular(n, seed)
        assert len(p.edges) == 3 * n // 2
        assert gamma_heuristic_maxcut(n) >= -brute_force_solve(p).optimal_cost + 1

    def test_parameter_rules(self):
        r = generate_random_qubo(5, 0)
        g, lam = heuristic_parameters(r)
        assert lam == pytest.approx(0.07 * g)
        m = generate_maxcut_3regular(6, 0)
        g, lam = heuristic_parameters(m)
        assert (g, lam) == pytest.approx((10.0, 0.3))
        g, lam = heuristic_parameters(m, "generic")
        assert g == pytest.approx(1.1 * np.abs(m.a).sum())

    def test_unknown_rule(self, toy1):
        with pytest.raises(InvalidInputError):
            heuristic_parameters(toy1, "bogus")


@given(st.integers(1, 7), st.integers(0, 10_000), st.floats(0.01, 3.0))
@settings(max_examples=30, deadline=None)
def test_apply_matches_oracle_property(n, seed, lam):
    p = generate_random_qubo(n, seed)
    h = build(p, 1.0, lam)
    v = np.random.default_rng(seed).normal(size=h.dim)
    np.testing.assert_allclose(apply(h, v), dense_oracle(p.a, 1.0, lam) @ v, atol=1e-11)
