"""Closed-form block updates against independent numerical minimizers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import sparsecell as sc
from sparsecell import admm as A

from conftest import (make_instance, random_beamformers, scalar_instance,
                      soc_projection_oracle, w_block_oracle)


def project_row(direct, others, kappa, tau):
    """Single-row wrapper around the vectorized cone projection."""
    n = len(others) + 1
    T = np.zeros((n, n), dtype=complex)
    T[0, 0] = direct
    T[0, 1:] = others
    K, kap, gamma = A.soc_project_rows(
        np.vstack([T[0], np.zeros((n - 1, n), dtype=complex) + np.eye(n, dtype=complex)[1:] * 1e9]),
        np.array([kappa] + [1e9] * (n - 1)),
        np.full(n, tau))
    return K[0, 0].real, K[0, 1:], kap[0], gamma[0]


class TestSocProjection:
    def test_feasible_target_untouched(self):
        k, oth, kap, gamma = project_row(5.0, np.array([1.0 + 1j]), 0.5, 2.0)
        # ||y|| = sqrt(2 + 0.25), sqrt(tau)*||y|| = 2.12 < 5
        assert gamma == 0.0
        assert k == pytest.approx(5.0)
        np.testing.assert_allclose(oth, [1.0 + 1j])
        assert kap == pytest.approx(0.5)

    def test_scalar_half_cone_example(self):
        # tau = 1, no interferers, targets (a_kappa, a_K) = (2, 1) -> (1.5, 1.5)
        k, oth, kap, gamma = project_row(1.0, np.zeros(0, dtype=complex), 2.0, 1.0)
        assert k == pytest.approx(1.5)
        assert kap == pytest.approx(1.5)
        assert gamma > 0

    def test_apex_case(self):
        # deep in the polar cone: projection is the origin
        k, oth, kap, gamma = project_row(-10.0, np.array([0.1 + 0j]), 0.1, 1.0)
        assert k == 0.0
        np.testing.assert_allclose(oth, [0.0])
        assert kap == 0.0

    def test_output_always_feasible(self, rng):
        for _ in range(200):
            n_int = rng.integers(0, 5)
            direct = complex(*rng.standard_normal(2)) * 3
            others = rng.standard_normal(n_int) + 1j * rng.standard_normal(n_int)
            kappa = float(rng.standard_normal()) * 2
            tau = float(rng.uniform(0.1, 10))
            k, oth, kap, _ = project_row(direct, others, kappa, tau)
            lhs = k
            rhs = np.sqrt(tau * (kap ** 2 + np.sum(np.abs(oth) ** 2)))
            assert lhs >= rhs - 1e-12

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_numerical_projection(self, seed):
        rng = np.random.default_rng(seed)
        n_int = int(rng.integers(0, 4))
        direct = complex(*(2 * rng.standard_normal(2)))
        others = rng.standard_normal(n_int) + 1j * rng.standard_normal(n_int)
        kappa = float(2 * rng.standard_normal())
        tau = float(rng.uniform(0.2, 5))
        k, oth, kap, _ = project_row(direct, others, kappa, tau)
        k_o, oth_o, kap_o = soc_projection_oracle(direct, others, kappa, tau)
        assert k == pytest.approx(k_o, abs=1e-6)
        assert kap == pytest.approx(kap_o, abs=1e-6)
        np.testing.assert_allclose(oth, oth_o, atol=1e-6)

    @settings(max_examples=150, deadline=None)
    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-3, 3), st.floats(0.1, 8))
    def test_projection_dominates_sampled_feasible_points(self, dre, dim, kappa, tau):
        # the projection must be at least as close to the target as any
        # feasible point (projection onto a convex set is the unique closest)
        direct = complex(dre, dim)
        others = np.array([0.7 - 0.2j])
        k, oth, kap, _ = project_row(direct, others, kappa, tau)
        d_star = (k - dre) ** 2 + dim ** 2 + np.sum(np.abs(oth - others) ** 2) \
            + (kap - kappa) ** 2
        rng = np.random.default_rng(17)
        for _ in range(40):
            y = rng.standard_normal(2) @ np.array([1, 1j]) * 2
            kk = float(rng.standard_normal())
            other_pt = np.array([y])
            k_min = np.sqrt(tau * (kk ** 2 + np.abs(y) ** 2))
            k_pt = k_min + abs(rng.standard_normal())
            d_pt = (k_pt - dre) ** 2 + dim ** 2 + np.sum(np.abs(other_pt - others) ** 2) \
                + (kk - kappa) ** 2
            assert d_star <= d_pt + 1e-9

    def test_update_K_kappa_per_user(self, rng):
        net = make_instance(2, 2, 2, 2, 1, seed=3)
        state = A.cold_start(net)
        state.V = random_beamformers(net.topology, rng)
        state.mu = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        state.delta = rng.standard_normal(4)
        cfg = sc.AdmmConfig()
        row, kap = A.update_K_kappa(state, net, cfg, user=1)
        # feasibility of the per-user output
        rhs = np.sqrt(net.sinr_target[1]
                      * (kap ** 2 + np.sum(np.abs(np.delete(row, 1)) ** 2)))
        assert row[1].real >= rhs - 1e-12
        assert row[1].imag == 0.0
        # consistency with the batched path
        signal = A.received_signal_matrix(net, state.V)
        K_all, kap_all, _ = A.soc_project_rows(signal - state.mu / cfg.rho,
                                               state.kappa_hat - state.delta / cfg.rho,
                                               net.sinr_target)
        np.testing.assert_allclose(row, K_all[1], atol=1e-12)
        assert kap == pytest.approx(kap_all[1], abs=1e-12)

    def test_rejects_bad_tau(self):
        with pytest.raises(sc.ConfigError):
            A.soc_project_rows(np.zeros((1, 1), dtype=complex), np.zeros(1),
                               np.array([0.0]))


class TestWUpdate:
    def test_zero_branch(self):
        out = A.shrink_w_block(np.array([1.0, 0.0]), beta=2.0, rho=1.0, budget=100.0)
        np.testing.assert_array_equal(out, [0.0, 0.0])

    def test_shrink_branch(self):
        out = A.shrink_w_block(np.array([3.0, 4.0]), beta=1.0, rho=2.0, budget=100.0)
        np.testing.assert_allclose(out, [2.7, 3.6], rtol=1e-12)

    def test_boundary_branch(self):
        out = A.shrink_w_block(np.array([3.0, 4.0]), beta=1.0, rho=2.0, budget=4.0)
        np.testing.assert_allclose(out, [1.2, 1.6], rtol=1e-12)

    def test_power_cap_machine_precision(self, rng):
        for _ in range(50):
            m = int(rng.integers(1, 6))
            b = 3 * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
            budget = float(rng.uniform(0.1, 4))
            out = A.shrink_w_block(b, beta=float(rng.uniform(0, 2)),
                                   rho=float(rng.uniform(0.5, 5)), budget=budget)
            assert np.sum(np.abs(out) ** 2) <= budget * (1 + 1e-14)
        # boundary branch lands exactly on the cap
        out = A.shrink_w_block(np.array([10.0 + 0j, 0.0]), 0.0, 1.0, 2.0)
        assert np.sum(np.abs(out) ** 2) == pytest.approx(2.0, rel=1e-14)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_cvxpy(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(1, 5))
        b = 2 * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
        beta = float(rng.uniform(0.0, 3.0))
        rho = float(rng.uniform(0.5, 5.0))
        budget = float(rng.uniform(0.5, 8.0))
        mine = A.shrink_w_block(b, beta, rho, budget)
        ref = w_block_oracle(b, beta, rho, budget)
        np.testing.assert_allclose(mine, ref, atol=2e-6)

    def test_update_w_per_bs(self, rng):
        net = make_instance(1, 2, 2, 2, 1, seed=5, budget=3.0)
        state = A.cold_start(net)
        state.V = random_beamformers(net.topology, rng)
        state.lam = [rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))]
        cfg = sc.AdmmConfig(beta=0.7, rho=2.0)
        blk = A.update_w(state, net, cfg, bs=1)
        b = (state.V.cells[0][:, 2:4] + state.lam[0][:, 2:4] / 2.0).ravel()
        expect = A.shrink_w_block(b, 0.7, 2.0, 3.0).reshape(2, 2)
        np.testing.assert_allclose(blk, expect, atol=1e-14)


class TestVUpdate:
    def test_fixed_point_when_consistent(self, rng):
        # duals zero, K = received signal, w = v, theta = 0 -> v unchanged
        net = make_instance(1, 2, 2, 2, 1, seed=11)
        state = A.cold_start(net)
        state.V = random_beamformers(net.topology, rng)
        state.W = state.V.copy()
        state.K = A.received_signal_matrix(net, state.V)
        cfg = sc.AdmmConfig(rho=1.0, theta=1e-300)   # theta must be positive
        V_new, kappa_hat = A.update_v(state, net, cfg, cell=0)
        np.testing.assert_allclose(V_new, state.V.cells[0], atol=1e-10)
        np.testing.assert_allclose(kappa_hat, np.sqrt(net.noise_power))

    def test_scalar_example(self):
        # M = 1, single user/BS, channel 1: rho=1, theta->0, K=2, w=2, duals 0 -> v=2
        net = scalar_instance()
        state = A.cold_start(net)
        state.K = np.array([[2.0 + 0j]])
        state.W.cells[0][0, 0] = 2.0
        cfg = sc.AdmmConfig(rho=1.0, theta=1e-300)
        V_new, _ = A.update_v(state, net, cfg, cell=0)
        assert V_new[0, 0] == pytest.approx(2.0)

    def test_stationarity_of_quadratic(self, rng):
        # the returned v zeroes the gradient of the per-cell quadratic
        net = make_instance(2, 2, 2, 2, 1, seed=13)
        n = net.num_users
        state = A.cold_start(net)
        state.V = random_beamformers(net.topology, rng)
        state.W = random_beamformers(net.topology, rng)
        state.K = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        state.mu = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        state.lam = [rng.standard_normal(c.shape) + 1j * rng.standard_normal(c.shape)
                     for c in state.V.cells]
        cfg = sc.AdmmConfig(rho=2.5, theta=0.3)

        V0, _ = A.update_v(state, net, cfg, cell=0)

        def quad(Vk):
            vv = state.V.copy()
            vv.cells[0] = Vk
            signal = A.received_signal_matrix(net, vv)
            users = list(net.topology.user_range(0))
            r1 = signal[:, users] - state.K[:, users] - state.mu[:, users] / cfg.rho
            r2 = Vk - state.W.cells[0] + state.lam[0] / cfg.rho
            return (cfg.rho / 2 * np.sum(np.abs(r1) ** 2)
                    + cfg.rho / 2 * np.sum(np.abs(r2) ** 2)
                    + cfg.theta * np.sum(np.abs(Vk) ** 2))

        base = quad(V0)
        g = np.zeros(V0.shape, dtype=complex)
        h = 1e-6
        for idx in np.ndindex(V0.shape):
            e = np.zeros_like(V0)
            e[idx] = h
            g[idx] = (quad(V0 + e) - quad(V0 - e)) / (2 * h) \
                + 1j * (quad(V0 + 1j * e) - quad(V0 - 1j * e)) / (2 * h)
        assert np.linalg.norm(g) <= 1e-6 * max(1.0, abs(base))


class TestDualsAndResiduals:
    def test_zero_residual_keeps_duals(self, rng):
        net = make_instance(1, 2, 2, 2, 1, seed=19)
        state = A.cold_start(net)
        state.V = random_beamformers(net.topology, rng)
        state.W = state.V.copy()
        state.K = A.received_signal_matrix(net, state.V)
        state.kappa = state.kappa_hat.copy()
        mu0 = state.mu.copy()
        A.update_duals(state, net, sc.AdmmConfig(rho=5.0))
        np.testing.assert_array_equal(state.mu, mu0)
        assert all(np.all(l == 0) for l in state.lam)
        np.testing.assert_array_equal(state.delta, np.zeros(net.num_users))

    def test_dual_step_is_rho_times_residual(self, rng):
        net = make_instance(2, 2, 2, 2, 1, seed=21)
        state = A.cold_start(net)
        state.V = random_beamformers(net.topology, rng)
        state.W = random_beamformers(net.topology, rng)
        n = net.num_users
        state.K = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        state.kappa = rng.standard_normal(n)
        rho = 5.0
        mu0, lam0 = state.mu.copy(), [l.copy() for l in state.lam]
        delta0 = state.delta.copy()
        A.update_duals(state, net, sc.AdmmConfig(rho=rho))
        sig = A.received_signal_matrix(net, state.V)
        np.testing.assert_allclose(state.mu - mu0, rho * (state.K - sig), atol=1e-12)
        for k in range(2):
            np.testing.assert_allclose(
                state.lam[k] - lam0[k],
                rho * (state.V.cells[k] - state.W.cells[k]), atol=1e-12)
        np.testing.assert_allclose(state.delta - delta0,
                                   rho * (state.kappa - state.kappa_hat), atol=1e-12)

    def test_mu_step_definitional(self):
        net = scalar_instance()
        state = A.cold_start(net)
        state.K = np.array([[1.5 + 0.5j]])     # v = 0 so residual is K itself
        A.update_duals(state, net, sc.AdmmConfig(rho=5.0))
        assert state.mu[0, 0] == pytest.approx(5 * (1.5 + 0.5j))

    def test_metric_zero_at_consistency(self, rng):
        net = make_instance(1, 2, 2, 2, 1, seed=23)
        state = A.cold_start(net)
        state.V = random_beamformers(net.topology, rng)
        state.W = state.V.copy()
        state.K = A.received_signal_matrix(net, state.V)
        state.kappa = np.sqrt(net.noise_power)
        cfg = sc.AdmmConfig(beta=0.0, theta=1.0)
        beta, theta = A.resolved_penalties(net, cfg)
        obj = A.objective_value(state.W, beta, theta)
        assert A.residual_metric(state, net, cfg, prev_objective=obj) == 0.0

    def test_metric_sees_single_entry_gap(self, rng):
        net = make_instance(1, 2, 2, 2, 1, seed=29)
        state = A.cold_start(net)
        state.V = random_beamformers(net.topology, rng)
        state.W = state.V.copy()
        state.K = A.received_signal_matrix(net, state.V)
        state.kappa = np.sqrt(net.noise_power)
        d = 0.3
        state.W.cells[0][0, 0] += d
        cfg = sc.AdmmConfig(beta=0.0, theta=1.0)
        beta, theta = A.resolved_penalties(net, cfg)
        obj = A.objective_value(state.W, beta, theta)
        metric = A.residual_metric(state, net, cfg, prev_objective=obj)
        v_norm = np.sqrt(state.V.total_power())
        w_norm = np.sqrt(state.W.total_power())
        assert metric >= d / max(1.0, v_norm, w_norm) - 1e-12


class TestLagrangianDescent:
    def test_each_block_never_increases_lagrangian(self, rng):
        net = make_instance(2, 2, 2, 2, 1, seed=37, tau=1.5, budget=20.0)
        cfg = sc.AdmmConfig(rho=5.0, beta=0.4, theta=0.05)
        beta, theta = A.resolved_penalties(net, cfg)
        state = A.cold_start(net)
        cache = A._CellSolveCache(net, cfg.rho, theta)
        top = net.topology
        m = top.tx_antennas
        for it in range(25):
            before = A.augmented_lagrangian(state, net, cfg)
            # block A: cone projection + per-BS shrink
            signal = A.received_signal_matrix(net, state.V)
            state.K, state.kappa, _ = A.soc_project_rows(
                signal - state.mu / cfg.rho,
                state.kappa_hat - state.delta / cfg.rho, net.sinr_target)
            for k in range(top.num_cells):
                for q in range(top.bs_per_cell[k]):
                    sl = slice(q * m, (q + 1) * m)
                    b = (state.V.cells[k][:, sl] + state.lam[k][:, sl] / cfg.rho).ravel()
                    bs = top.bs_offset(k) + q
                    state.W.cells[k][:, sl] = A.shrink_w_block(
                        b, float(beta[bs]), cfg.rho,
                        float(net.power_budget[bs])).reshape(state.V.cells[k][:, sl].shape)
            mid = A.augmented_lagrangian(state, net, cfg)
            if it >= 1:
                # cold-start block variables are allowed to be infeasible, so
                # the very first projection may move the value up onto the set
                assert mid <= before + 1e-9
            # block B: per-cell least squares
            for k in range(top.num_cells):
                state.V.cells[k], _ = A.update_v(state, net, cfg, k, cache)
            after = A.augmented_lagrangian(state, net, cfg)
            assert after <= mid + 1e-9
            A.update_duals(state, net, cfg)

    def test_block_a_feasibility_exact_every_iteration(self, rng):
        net = make_instance(2, 2, 2, 2, 1, seed=41, tau=2.0, budget=5.0)
        cfg = sc.AdmmConfig(rho=5.0, beta=0.2, eps_tol=1e-6,
                            max_iters=400, infeasible_iter_cap=400)
        beta, theta = A.resolved_penalties(net, cfg)
        state = A.cold_start(net)
        cache = A._CellSolveCache(net, cfg.rho, theta)
        for it in range(60):
            A._step(state, net, cfg, beta, theta, cache)
            # cone constraints with real diagonal
            diag = np.real(np.diag(state.K))
            assert np.all(np.abs(np.imag(np.diag(state.K))) == 0.0)
            off_sq = np.sum(np.abs(state.K) ** 2, axis=1) - np.abs(np.diag(state.K)) ** 2
            rhs = np.sqrt(net.sinr_target * (state.kappa ** 2 + off_sq))
            assert np.all(diag >= rhs - 1e-12)
            # per-BS power caps on w, exactly
            norms_sq = state.W.bs_norms() ** 2
            assert np.all(norms_sq <= net.power_budget * (1 + 1e-14) + 1e-30)
