import numpy as np
import pytest
from scipy.optimize import brentq, minimize

from landscape_qubo.errors import InvalidInputError, SingularOverlapError
from landscape_qubo.experiments import tight_parameters
from landscape_qubo.hamiltonian import build, heuristic_parameters
from landscape_qubo.landscape import sampling_distribution, solve_landscape
from landscape_qubo.qubo import QuboProblem, brute_force_solve, generate_random_qubo
from landscape_qubo.statevector import basis_state, expectation_ising, plus_state
from landscape_qubo.varprep import (
    AnsatzParams,
    VariationalConfig,
    cnot_count,
    cost_fv,
    gradient_fv,
    optimize,
    prepare_ansatz,
    sampled_qubo_stats,
)

H1 = np.array([[2.0, -0.5], [-0.5, 1.0]])


def toy1_h():
    return build(QuboProblem(np.array([[-1.0]])), 2.0, 0.5)


def toy2_h():
    return build(QuboProblem(np.array([[1.0, -2.0], [-2.0, 1.0]])), 3.0, 0.4)


def ry_plus(theta):
    """R_y(theta)|+> = (cos(theta/2 + pi/4), sin(theta/2 + pi/4))."""
    a = np.asarray(theta) / 2 + np.pi / 4
    return np.cos(a), np.sin(a)


def fv_oracle_n1(theta):
    c, s = ry_plus(theta)
    energy = H1[0, 0] * c**2 + 2 * H1[0, 1] * c * s + H1[1, 1] * s**2
    return (energy - (c + s) / np.sqrt(2)) ** 2


def fv_oracle_n2(t0, t1, m):
    """One layer on two qubits: product state, then CNOT(0 -> 1) swaps indices 1 and 3."""
    c0, s0 = ry_plus(t0)
    c1, s1 = ry_plus(t1)
    psi = np.stack(np.broadcast_arrays(c0 * c1, s0 * c1, c0 * s1, s0 * s1))  # index = q0 + 2 q1
    psi = psi[[0, 3, 2, 1]]
    energy = np.einsum("i...,ij,j...->...", psi, m, psi)
    return (energy - psi.sum(axis=0) / 2) ** 2


def grid_minimum_n1():
    theta = np.linspace(0, 2 * np.pi, 200_001)
    t0 = theta[np.argmin(fv_oracle_n1(theta))]
    return minimize(lambda t: fv_oracle_n1(t[0]), [t0], method="Powell", options={"xtol": 1e-12, "ftol": 1e-16}).fun


def grid_minimum_n2(m):
    t = np.linspace(0, 2 * np.pi, 801)
    grid = fv_oracle_n2(t[:, None], t[None, :], m)
    i, j = np.unravel_index(np.argmin(grid), grid.shape)
    res = minimize(lambda x: fv_oracle_n2(x[0], x[1], m), [t[i], t[j]], method="Powell", options={"xtol": 1e-12, "ftol": 1e-16})
    return min(res.fun, grid[i, j])


class TestAnsatzParams:
    def test_shape_and_size(self):
        p = AnsatzParams.zeros(5, 3)
        assert p.theta.shape == (3, 5) and p.size == 15

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInputError):
            AnsatzParams(2, 1, [0.0, np.nan])

    def test_rejects_zero_layers(self):
        with pytest.raises(InvalidInputError):
            AnsatzParams(2, 0, [])


class TestPrepareAnsatz:
    @pytest.mark.parametrize("n", [1, 3, 10])
    def test_zero_angles_give_plus(self, n):
        np.testing.assert_allclose(prepare_ansatz(AnsatzParams.zeros(n, 4)), plus_state(n), atol=1e-12)

    def test_cnot_count(self):
        assert cnot_count(10, 4) == 36
        assert cnot_count(1, 4) == 0

    def test_norm_and_realness(self):
        rng = np.random.default_rng(0)
        for n in (2, 5, 8):
            psi = prepare_ansatz(AnsatzParams(n, 4, rng.uniform(0, 2 * np.pi, 4 * n)))
            assert psi.dtype == np.float64
            assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-10)

    def test_matches_closed_form_n2(self):
        psi = prepare_ansatz(AnsatzParams(2, 1, [0.3, 1.7]))
        c0, s0 = ry_plus(0.3)
        c1, s1 = ry_plus(1.7)
        np.testing.assert_allclose(psi, [c0 * c1, s0 * s1, c0 * s1, s0 * c1], atol=1e-15)


class TestCostFv:
    def test_nonnegative(self):
        h = build(generate_random_qubo(4, 0), 5.0, 0.3)
        rng = np.random.default_rng(1)
        for _ in range(20):
            assert cost_fv(AnsatzParams(4, 2, rng.uniform(0, 6, 8)), h) >= 0

    def test_n1_closed_form(self):
        for t in (0.0, 0.4, 2.2, 5.9):
            assert cost_fv(AnsatzParams(1, 1, [t]), toy1_h()) == pytest.approx(fv_oracle_n1(t), abs=1e-14)

    def test_mismatch(self):
        with pytest.raises(InvalidInputError):
            cost_fv(AnsatzParams.zeros(2, 1), toy1_h())


def fd_gradient(params, h, step=1e-5):
    g = np.zeros(params.size)
    flat = params.theta.ravel()
    for i in range(params.size):
        up, dn = flat.copy(), flat.copy()
        up[i] += step
        dn[i] -= step
        g[i] = (cost_fv(params.with_theta(up), h) - cost_fv(params.with_theta(dn), h)) / (2 * step)
    return g


class TestGradient:
    @pytest.mark.parametrize("n", [1, 2, 4, 6])
    def test_matches_finite_differences(self, n):
        p = generate_random_qubo(n, n)
        h = build(p, *heuristic_parameters(p))
        rng = np.random.default_rng(n)
        for _ in range(3):
            params = AnsatzParams(n, 4, rng.uniform(0, 2 * np.pi, 4 * n))
            g = gradient_fv(params, h).ravel()
            fd = fd_gradient(params, h)
            assert np.abs(g - fd).max() / np.abs(fd).max() < 1e-5

    @pytest.mark.parametrize("n,layers", [(1, 1), (3, 2), (5, 4)])
    def test_preparation_count(self, n, layers):
        h = build(generate_random_qubo(n, 0), 10.0, 0.2)
        stats = {}
        gradient_fv(AnsatzParams(n, layers, np.full(n * layers, 0.3)), h, stats)
        assert stats["preparations"] == 2 * layers * n + 1

    def test_zero_where_energy_equals_overlap(self):
        h = toy1_h()

        def gap(t):
            c, s = ry_plus(t)
            return H1[0, 0] * c**2 + 2 * H1[0, 1] * c * s + H1[1, 1] * s**2 - (c + s) / np.sqrt(2)

        ts = np.linspace(0, 2 * np.pi, 400)
        k = np.flatnonzero(np.sign(gap(ts[:-1])) != np.sign(gap(ts[1:])))[0]
        root = brentq(gap, ts[k], ts[k + 1], xtol=1e-15)
        assert np.abs(gradient_fv(AnsatzParams(1, 1, [root]), h)).max() < 1e-12

    def test_singular_overlap(self):
        # R_y(pi)|+> = |->, orthogonal to |+>
        with pytest.raises(SingularOverlapError):
            gradient_fv(AnsatzParams(1, 1, [np.pi]), toy1_h())


class TestOptimize:
    def test_n1_reaches_grid_optimum(self):
        best = grid_minimum_n1()
        for method in ("nelder-mead", "cobyla", "gradient"):
            trace = optimize(toy1_h(), VariationalConfig(layers=1, restarts=3, max_iters=500, method=method))
            assert abs(trace.best_fv - best) < 1e-6, method

    def test_n1_stationary(self):
        trace = optimize(toy1_h(), VariationalConfig(layers=1, restarts=3, max_iters=500))
        assert np.abs(gradient_fv(trace.best_params, toy1_h())).max() < 1e-6

    def test_n2_reaches_grid_optimum(self):
        h = toy2_h()
        best = grid_minimum_n2(np.diag(h.diagonal) - 0.4 * np.array(
            [[0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 0, 1], [0, 1, 1, 0]]
        ))
        trace = optimize(h, VariationalConfig(layers=1, restarts=4, max_iters=1000))
        assert abs(trace.best_fv - best) < 1e-6

    def test_trace_structure(self):
        h = build(generate_random_qubo(3, 1), 6.0, 0.3)
        cfg = VariationalConfig(layers=2, restarts=3, max_iters=120, sample_interval=50, sample_count=7)
        trace = optimize(h, cfg, landscape_u=solve_landscape(h).u)
        assert len(trace.restarts) == 3
        assert trace.best_fv == min(rt.best_fv for rt in trace.restarts)
        for rt in trace.restarts:
            assert rt.iterations[0][0] == 0
            assert rt.best_fv == min(fv for _, fv in rt.iterations)
            assert all(it % 50 == 0 for it, _, _ in rt.sampled_stats)
            assert 0.0 <= rt.fidelity <= 1.0 + 1e-12
            assert len(rt.iterations) <= cfg.max_iters + 1

    def test_deterministic(self):
        h = build(generate_random_qubo(3, 2), 6.0, 0.3)
        cfg = VariationalConfig(layers=2, restarts=2, max_iters=100, seed=5)
        a, b = optimize(h, cfg), optimize(h, cfg, threads=2)
        assert [rt.iterations for rt in a.restarts] == [rt.iterations for rt in b.restarts]
        assert [rt.sampled_stats for rt in a.restarts] == [rt.sampled_stats for rt in b.restarts]

    def test_seeds_differ(self):
        h = build(generate_random_qubo(3, 2), 6.0, 0.3)
        a = optimize(h, VariationalConfig(layers=1, restarts=1, max_iters=10, seed=1))
        b = optimize(h, VariationalConfig(layers=1, restarts=1, max_iters=10, seed=2))
        assert a.restarts[0].iterations[0] != b.restarts[0].iterations[0]

    def test_sampled_mean_moves_toward_landscape(self):
        first, last = [], []
        for seed in range(6):
            p = generate_random_qubo(4, seed)
            h = build(p, *tight_parameters(p, 0.6, 0.3))
            ref = expectation_ising(h.ising_diag, sampling_distribution(solve_landscape(h)))
            cfg = VariationalConfig(layers=2, restarts=2, max_iters=400, sample_interval=50, sample_count=4000, seed=seed)
            for rt in optimize(h, cfg).restarts:
                s = rt.sampled_stats
                quartile = s[-max(1, len(s) // 4):]
                first.append(abs(s[0][1] - ref))
                last.append(abs(np.mean([m for _, m, _ in quartile]) - ref))
        assert np.mean(last) < 0.5 * np.mean(first)
        assert sum(l < f for f, l in zip(first, last)) > len(first) // 2


class TestConfig:
    def test_defaults(self):
        cfg = VariationalConfig()
        assert (cfg.layers, cfg.restarts, cfg.max_iters, cfg.sample_interval, cfg.sample_count) == (4, 10, 2000, 200, 10)

    def test_roundtrip(self):
        cfg = VariationalConfig(layers=2, method="cobyla")
        assert VariationalConfig.from_dict(cfg.to_dict()) == cfg

    @pytest.mark.parametrize("bad", [{"method": "adam"}, {"layers": 0}, {"sample_count": 0}, {"bogus": 1}])
    def test_rejects(self, bad):
        with pytest.raises(InvalidInputError):
            VariationalConfig.from_dict(bad)


class TestSampledStats:
    def test_point_mass(self):
        p = generate_random_qubo(4, 3)
        sol = brute_force_solve(p)
        mean, std = sampled_qubo_stats(basis_state(4, sol.optimizers[0].index), p, 50, 0)
        assert mean == pytest.approx(sol.optimal_cost, abs=1e-12)
        assert std == pytest.approx(0.0, abs=1e-12)

    def test_uniform_five_sigma(self):
        p = generate_random_qubo(6, 4)
        diag = build(p, 1.0, 0.1).ising_diag
        shots = 100_000
        mean, _ = sampled_qubo_stats(plus_state(6), diag, shots, 9)
        assert abs(mean - diag.mean()) <= 5 * diag.std() / np.sqrt(shots)

    def test_deterministic(self):
        p = generate_random_qubo(4, 3)
        assert sampled_qubo_stats(plus_state(4), p, 10, 1) == sampled_qubo_stats(plus_state(4), p, 10, 1)
