"""Shared builders and independent numerical minimizers used as test oracles."""

import numpy as np
import pytest

import sparsecell as sc


def make_instance(num_cells=1, bs_per_cell=2, users_per_cell=2, tx_antennas=1,
                  rx_antennas=1, seed=0, noise=1.0, tau=2.0, budget=1e6,
                  channels=None):
    """Hand-built instance with unit-variance Rayleigh channels (no geometry)."""
    K, Q, I = num_cells, bs_per_cell, users_per_cell
    M, N = tx_antennas, rx_antennas
    rng = np.random.default_rng(seed)
    top = sc.NetworkTopology(
        num_cells=K, bs_per_cell=(Q,) * K, users_per_cell=(I,) * K,
        tx_antennas=M, rx_antennas=N,
        cell_centers=np.zeros((K, 2)),
        bs_positions=np.zeros((K * Q, 2)),
        user_positions=np.zeros((K * I, 2)))
    if channels is None:
        channels = (rng.standard_normal((K * I, K * Q, N, M))
                    + 1j * rng.standard_normal((K * I, K * Q, N, M))) / np.sqrt(2)
    return sc.NetworkInstance(
        topology=top, channels=np.asarray(channels, dtype=complex),
        noise_power=np.full(K * I, float(noise)),
        power_budget=np.full(K * Q, float(budget)),
        sinr_target=np.full(K * I, float(tau)))


def scalar_instance(h=1.0, noise=1.0, tau=3.0, budget=10.0):
    """One cell, one BS, one user, one antenna."""
    return make_instance(1, 1, 1, 1, 1, channels=np.full((1, 1, 1, 1), h, dtype=complex),
                         noise=noise, tau=tau, budget=budget)


def random_beamformers(top, rng, scale=1.0):
    cells = []
    for k in range(top.num_cells):
        shape = (top.users_per_cell[k], top.tx_antennas * top.bs_per_cell[k])
        cells.append(scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)))
    return sc.BeamformerSet(top, cells)


# --- numerical minimizers (independent of the closed forms under test) ------

def soc_projection_oracle(direct, others, kappa, tau):
    """Projection of (direct, others, kappa) onto K >= sqrt(tau)*||(kappa, others)||,
    K real, solved as a second-order cone program."""
    import cvxpy as cp

    n_o = len(others)
    k = cp.Variable()
    rest = cp.Variable(2 * n_o + 1)     # [Re(others), Im(others), kappa]
    target = np.concatenate([np.real(others), np.imag(others), [kappa]])
    prob = cp.Problem(
        cp.Minimize(cp.square(k - np.real(direct)) + cp.sum_squares(rest - target)),
        [np.sqrt(tau) * cp.norm(rest, 2) <= k])
    prob.solve()
    oth = rest.value[:n_o] + 1j * rest.value[n_o:2 * n_o]
    return float(k.value), oth, float(rest.value[-1])


def w_block_oracle(b, beta, rho, budget):
    """cvxpy minimizer of beta*||w|| + rho/2*||w-b||^2 s.t. ||w||^2 <= budget."""
    import cvxpy as cp

    br = np.concatenate([np.real(b), np.imag(b)])
    w = cp.Variable(br.shape[0])
    prob = cp.Problem(
        cp.Minimize(beta * cp.norm(w, 2) + rho / 2 * cp.sum_squares(w - br)),
        [cp.sum_squares(w) <= budget])
    prob.solve()
    m = len(b)
    return w.value[:m] + 1j * w.value[m:]


def _real_stack_matrix(M):
    """Real 2m x 2m form of the Hermitian quadratic x^H M x."""
    A, B = np.real(M), np.imag(M)
    return np.block([[A, -B], [B, A]])


def bs_block_oracle(Cqq, R, budget, v_reg, cluster_weight):
    """cvxpy minimizer of the per-BS block problem (all users at one BS)."""
    import cvxpy as cp

    m, n_users = R.shape
    Mr = _real_stack_matrix(Cqq + v_reg * np.eye(m))
    Mr = 0.5 * (Mr + Mr.T)
    xs = [cp.Variable(2 * m) for _ in range(n_users)]
    obj = 0
    for i in range(n_users):
        rr = np.concatenate([np.real(R[:, i]), np.imag(R[:, i])])
        obj = obj + cp.quad_form(xs[i], cp.psd_wrap(Mr)) - 2 * rr @ xs[i]
        if cluster_weight > 0:
            obj = obj + cluster_weight * cp.norm(xs[i], 2)
    constraint = [sum(cp.sum_squares(x) for x in xs) <= budget]
    cp.Problem(cp.Minimize(obj), constraint).solve()
    out = np.zeros((m, n_users), dtype=complex)
    for i in range(n_users):
        out[:, i] = xs[i].value[:m] + 1j * xs[i].value[m:]
    return out


def alpha_coordinate_oracle(a_qq, c, mu):
    """Scalar minimizer of a*t^2 - 2*c*t + mu*|t| over [-1, 1] by bounded search."""
    from scipy.optimize import minimize_scalar

    def f(t):
        return a_qq * t * t - 2.0 * c * t + mu * abs(t)

    candidates = [0.0, -1.0, 1.0]
    for lo, hi in ((-1.0, 0.0), (0.0, 1.0)):
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14})
        candidates.append(float(res.x))
    return min(candidates, key=f)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
