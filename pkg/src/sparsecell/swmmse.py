"""Block-coordinate solver for regularized sum-rate maximization with
base-station activation and optional serving-cluster shrinkage.

Sum-rate maximization is handled through its weighted-MSE form: minimize
sum_i (w_i * e_i(u_i, v) - log w_i) + sum_q mu_q * |alpha_q|  over receive
filters u, weights w, activation scalars alpha (|alpha_q| <= 1) and
normalized beamformers vbar (per-BS power capped), with the effective
transmit beamformer v = alpha * vbar.  Each block has an exact minimizer:

  u     closed-form MMSE receivers,
  w     closed-form inverse-MMSE weights,
  vbar  per-cell block coordinate descent over BS blocks, each a ridge
        least-squares with a power ball (dual scalar found by bisection),
        plus a group soft-threshold per (user, BS) block when the
        cluster penalty lambda_k is on,
  alpha per-cell coordinate descent, each coordinate a clipped scalar
        soft-threshold.

The objective never increases across a block update; a small ridge
(eps * ||vbar||^2) keeps the vbar blocks strictly convex.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .network import (BeamformerSet, NetworkInstance, default_active_tol,
                      embed_beamformers, rate, restrict_to_bs)
from .report import CONVERGED, MAX_ITERS, SolveReport


@dataclass
class SwmmseConfig:
    mu: float | np.ndarray = 0.0          # per-BS activation penalty (rate units)
    cluster_penalty: float | np.ndarray = 0.0   # per-cell lambda_k
    v_reg: float = 1e-8                   # ridge on vbar blocks
    bisect_tol: float = 1e-10             # relative power-constraint activation
    max_outer_iters: int = 300
    obj_tol: float = 1e-6                 # relative objective change stop
    inner_tol: float = 1e-8
    inner_iters: int = 200
    reweight_eps: float = 1e-3
    reweight_rounds: int = 10
    min_active_fraction: float = 0.5

    def validate(self):
        if np.any(np.asarray(self.mu) < 0) or np.any(np.asarray(self.cluster_penalty) < 0):
            raise ConfigError("penalties must be nonnegative")
        if self.v_reg <= 0 or self.bisect_tol <= 0:
            raise ConfigError("v_reg and bisect_tol must be positive")
        if self.max_outer_iters < 1 or self.inner_iters < 1:
            raise ConfigError("iteration limits must be positive")
        if self.reweight_eps <= 0:
            raise ConfigError("reweight_eps must be positive")
        if not 0 <= self.min_active_fraction <= 1:
            raise ConfigError("min_active_fraction must lie in [0, 1]")


def resolved_mu(net: NetworkInstance, config: SwmmseConfig) -> np.ndarray:
    return np.broadcast_to(np.asarray(config.mu, dtype=float), (net.num_bs,)).copy()


def resolved_cluster_penalty(net: NetworkInstance, config: SwmmseConfig) -> np.ndarray:
    return np.broadcast_to(np.asarray(config.cluster_penalty, dtype=float),
                           (net.topology.num_cells,)).copy()


@dataclass
class SwmmseState:
    alpha: list[np.ndarray]           # per cell, (Q_k,) in [-1, 1]
    vbar: BeamformerSet               # normalized beamformers, per-BS power capped
    u: np.ndarray                     # (n_users, N) receive filters
    w: np.ndarray                     # (n_users,) MSE weights
    degenerate_alpha: int = 0         # coordinates hit the zero-curvature clip branch

    def effective(self) -> BeamformerSet:
        top = self.vbar.topology
        m = top.tx_antennas
        cells = []
        for k in range(top.num_cells):
            scale = np.repeat(self.alpha[k], m)
            cells.append(self.vbar.cells[k] * scale[None, :])
        return BeamformerSet(top, cells)

    def alpha_flat(self) -> np.ndarray:
        return np.concatenate(self.alpha)


def init_vbar(net: NetworkInstance) -> BeamformerSet:
    """Feasible start: per-user matched filters, per-BS budget split evenly
    across the cell's users."""
    top = net.topology
    m = top.tx_antennas
    out = BeamformerSet.zeros(top)
    for k in range(top.num_cells):
        users = list(top.user_range(k))
        share = net.power_budget[list(top.bs_range(k))] / top.users_per_cell[k]
        for j, i in enumerate(users):
            for q in range(top.bs_per_cell[k]):
                H = net.channels[i, top.bs_offset(k) + q]      # (N, M)
                # dominant transmit direction of the link
                _, _, vh = np.linalg.svd(H)
                d = vh[0].conj()
                out.cells[k][j, q * m:(q + 1) * m] = np.sqrt(share[q]) * d
    return out


def initial_state(net: NetworkInstance, vbar: BeamformerSet | None = None) -> SwmmseState:
    top = net.topology
    if vbar is None:
        vbar = init_vbar(net)
    per_bs = vbar.bs_norms() ** 2
    if np.any(per_bs > net.power_budget * (1 + 1e-9)):
        raise ConfigError("initial beamformers violate per-BS power budgets")
    return SwmmseState(
        alpha=[np.ones(top.bs_per_cell[k]) for k in range(top.num_cells)],
        vbar=vbar.copy(),
        u=np.zeros((top.num_users, top.rx_antennas), dtype=complex),
        w=np.ones(top.num_users),
    )


# --- batched link statistics -------------------------------------------------

def _link_stats(net: NetworkInstance, v: BeamformerSet):
    """Received-signal vectors and full covariances for every user.

    Returns (recv, J, s): recv[i, :, t] is what user i receives from user
    t's beamformer, J[i] the signal-plus-interference-plus-noise covariance,
    s[i] the direct term recv[i, :, i].
    """
    top = net.topology
    n, N = top.num_users, top.rx_antennas
    blocks = [np.einsum('inp,jp->inj', net.cell_channel(l), v.cells[l])
              for l in range(top.num_cells)]
    recv = np.concatenate(blocks, axis=2)                     # (n, N, n)
    J = np.einsum('int,imt->inm', recv, recv.conj())
    J += net.noise_power[:, None, None] * np.eye(N)[None]
    s = recv[np.arange(n), :, np.arange(n)]                   # (n, N), direct terms
    return recv, J, s


def _mse_all(net: NetworkInstance, u: np.ndarray, J: np.ndarray, s: np.ndarray) -> np.ndarray:
    """e_i = 1 - 2 Re(u_i^H s_i) + u_i^H J_i u_i, batched over users."""
    cross = np.real(np.einsum('in,in->i', u.conj(), s))
    quad = np.real(np.einsum('in,inm,im->i', u.conj(), J, u))
    return 1.0 - 2.0 * cross + quad


def update_u(state: SwmmseState, net: NetworkInstance) -> np.ndarray:
    """MMSE receive filters for the current effective beamformers."""
    _, J, s = _link_stats(net, state.effective())
    return np.linalg.solve(J, s[..., None])[..., 0]


def update_weights(state: SwmmseState, net: NetworkInstance) -> np.ndarray:
    """Inverse-MMSE weights at the current effective beamformers and filters."""
    _, J, s = _link_stats(net, state.effective())
    e = _mse_all(net, state.u, J, s)
    return 1.0 / e


def weighted_mse_objective(state: SwmmseState, net: NetworkInstance,
                           mu: np.ndarray) -> float:
    """sum_i (w_i e_i - log w_i) + sum_q mu_q |alpha_q| at the current state."""
    _, J, s = _link_stats(net, state.effective())
    e = _mse_all(net, state.u, J, s)
    val = float(np.sum(state.w * e) - np.sum(np.log(state.w)))
    val += float(np.sum(mu * np.abs(state.alpha_flat())))
    return val


def _cell_filter_quad(net: NetworkInstance, state: SwmmseState, k: int):
    """T_k = sum_j w_j (H_j^k)^H u_j u_j^H H_j^k and per-user G_i = (H_i^k)^H u_i."""
    Hk = net.cell_channel(k)                                  # (n, N, M*Q_k)
    G = np.einsum('inp,in->ip', Hk.conj(), state.u)           # (n, M*Q_k)
    T = (state.w[:, None] * G).T @ G.conj()
    return T, G


def alpha_coordinate(a_qq: float, c: float, mu: float) -> tuple[float, bool]:
    """Exact minimizer of a_qq*t^2 - 2*c*t + mu*|t| over t in [-1, 1].

    Zero inside the threshold band 2|c| <= mu; otherwise the scalar
    soft-threshold point, clipped to sign(c) at the box edge.  The second
    return flags the degenerate zero-curvature clip branch.
    """
    if 2.0 * abs(c) <= mu:
        return 0.0, False
    if a_qq > 0:
        cand = (-mu * np.sign(c) + 2.0 * c) / (2.0 * a_qq)
        return (cand, False) if abs(cand) < 1.0 else (float(np.sign(c)), False)
    return float(np.sign(c)), True


def update_alpha(state: SwmmseState, net: NetworkInstance, config: SwmmseConfig,
                 cell: int) -> tuple[np.ndarray, int]:
    """Exact coordinate descent for the cell's activation scalars.

    Returns (alpha_k, degenerate_count); degenerate coordinates are those
    with zero curvature that still clear the threshold (clipped to +-1).
    """
    top = net.topology
    m = top.tx_antennas
    Q = top.bs_per_cell[cell]
    mu = resolved_mu(net, config)[list(top.bs_range(cell))]
    T, G = _cell_filter_quad(net, state, cell)
    users = list(top.user_range(cell))
    Vb = state.vbar.cells[cell].reshape(len(users), Q, m)
    Tb = T.reshape(Q, m, Q, m)
    A = np.real(np.einsum('ipm,pmqn,iqn->pq', Vb.conj(), Tb, Vb))
    Gb = G[users].reshape(len(users), Q, m)
    b = np.real(np.einsum('i,iqm,iqm->q', state.w[users], Vb.conj(), Gb))

    alpha = state.alpha[cell].copy()
    degenerate = 0
    for _ in range(config.inner_iters):
        biggest = 0.0
        for q in range(Q):
            c = b[q] - (A[:, q] @ alpha - A[q, q] * alpha[q])
            old = alpha[q]
            alpha[q], deg = alpha_coordinate(A[q, q], c, mu[q])
            degenerate += deg
            biggest = max(biggest, abs(alpha[q] - old))
        if biggest < config.inner_tol * (1.0 + np.max(np.abs(alpha))):
            break
    return alpha, degenerate


def _secular_norm_root(evals: np.ndarray, rt: np.ndarray, half_penalty: float) -> float:
    """Solve ||x(t)|| = t for x(t) = (diag(evals) + (half_penalty/t) I)^{-1} rt
    in the eigenbasis; returns t.  Assumes ||rt|| > half_penalty."""
    r_sq = np.abs(rt) ** 2

    def phi(uu):
        return uu * np.sqrt(np.sum(r_sq / (evals + half_penalty * uu) ** 2))

    hi = 1.0
    for _ in range(200):
        if phi(hi) >= 1.0:
            break
        hi *= 2.0
    lo = 0.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if phi(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    u_root = 0.5 * (lo + hi)
    return 1.0 / u_root


def _eigbasis_solutions(evals_eff, Rt, half_penalty):
    """Per-user minimizers in the eigenbasis: columns of
    (diag(evals_eff) + (half_penalty/t_i) I)^{-1} rt_i with the group
    threshold applied; plain ridge solve when half_penalty == 0."""
    if half_penalty == 0.0:
        return Rt / evals_eff[:, None]
    X = np.zeros_like(Rt)
    norms = np.linalg.norm(Rt, axis=0)
    for i in np.flatnonzero(norms > half_penalty):
        t = _secular_norm_root(evals_eff, Rt[:, i], half_penalty)
        X[:, i] = Rt[:, i] / (evals_eff + half_penalty / t)
    return X


def _solve_block_factored(evals, U, R, budget, v_reg, half_penalty, bisect_tol):
    """Power-capped block solve given the eigendecomposition of the block
    quadratic.  The power dual is located by safeguarded Newton (the power
    curve is convex decreasing in the dual); the returned point satisfies
    the budget."""
    Rt = U.conj().T @ R
    d0 = evals + v_reg

    if half_penalty == 0.0:
        # scalar Newton on the power curve; plain floats beat numpy dispatch
        # at these block sizes
        pairs = list(zip(np.sum(np.abs(Rt) ** 2, axis=1).tolist(), d0.tolist()))

        def power_slope(delta):
            f = fp = 0.0
            for ci, di in pairs:
                t = di + delta
                r = ci / (t * t)
                f += r
                fp -= 2.0 * r / t
            return f, fp

        def power(delta):
            return power_slope(delta)[0]
    else:
        def power(delta):
            return float(np.sum(np.abs(
                _eigbasis_solutions(d0 + delta, Rt, half_penalty)) ** 2))

    delta = 0.0
    p = power(0.0)
    if p > budget:
        if half_penalty == 0.0:
            for _ in range(200):
                f, fp = power_slope(delta)
                gap = f - budget
                if abs(gap) <= bisect_tol * budget:
                    break
                delta -= gap / fp
        else:
            hi = 1.0
            for _ in range(200):
                if power(hi) <= budget:
                    break
                hi *= 2.0
            lo = 0.0
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if power(mid) > budget:
                    lo = mid
                else:
                    hi = mid
                if power(hi) >= budget * (1.0 - bisect_tol):
                    break
            delta = hi
        bump = max(delta, 1.0) * 1e-14
        for _ in range(100):
            if power(delta) <= budget:
                break
            delta += bump
            bump *= 2.0
    return U @ _eigbasis_solutions(d0 + delta, Rt, half_penalty)


def solve_bs_block(Cqq: np.ndarray, R: np.ndarray, budget: float, v_reg: float,
                   cluster_weight: float = 0.0, bisect_tol: float = 1e-10) -> np.ndarray:
    """Exact minimizer of one BS block given the rest of the cell:

        min over x_1..x_I   sum_i [ x_i^H (Cqq + v_reg I) x_i - 2 Re(r_i^H x_i)
                                    + cluster_weight * ||x_i|| ]
        s.t.                sum_i ||x_i||^2 <= budget

    with R = [r_1 .. r_I] column-wise.  The power dual is found numerically
    and the returned block satisfies the budget.
    """
    evals, U = np.linalg.eigh(Cqq)
    evals = np.maximum(evals, 0.0)
    return _solve_block_factored(evals, U, R, budget, v_reg,
                                 0.5 * cluster_weight, bisect_tol)


def _vbar_cell_bcd(state: SwmmseState, net: NetworkInstance, config: SwmmseConfig,
                   cell: int, cluster_weight: float) -> np.ndarray:
    """Inner BCD over the cell's BS blocks; exact block minimizers with the
    per-BS power dual found by bisection.  Blocks with alpha_q == 0 do not
    enter the objective and are left untouched."""
    top = net.topology
    m = top.tx_antennas
    Q = top.bs_per_cell[cell]
    users = list(top.user_range(cell))
    T, G = _cell_filter_quad(net, state, cell)
    a_vec = np.repeat(state.alpha[cell], m)
    C = a_vec[:, None] * T * a_vec[None, :]
    D = (state.w[users, None] * a_vec[None, :] * G[users]).T   # (M*Q_k, I_k)

    Vc = state.vbar.cells[cell].T.copy()                       # (M*Q_k, I_k)
    live = [q for q in range(Q) if state.alpha[cell][q] != 0.0]
    half_pen = 0.5 * cluster_weight
    factors = {}
    for q in live:
        sl = slice(q * m, (q + 1) * m)
        evals, U = np.linalg.eigh(C[sl, sl])
        factors[q] = (np.maximum(evals, 0.0), U)
    for _ in range(config.inner_iters):
        biggest = 0.0
        for q in live:
            sl = slice(q * m, (q + 1) * m)
            R = D[sl] - C[sl, :] @ Vc + C[sl, sl] @ Vc[sl]
            budget = float(net.power_budget[top.bs_offset(cell) + q])
            evals, U = factors[q]
            X = _solve_block_factored(evals, U, R, budget, config.v_reg,
                                      half_pen, config.bisect_tol)
            biggest = max(biggest, float(np.max(np.abs(X - Vc[sl]))))
            Vc[sl] = X
        if biggest < config.inner_tol * (1.0 + np.sqrt(np.sum(np.abs(Vc) ** 2))):
            break
    return Vc.T


def update_vbar(state: SwmmseState, net: NetworkInstance, config: SwmmseConfig,
                cell: int) -> np.ndarray:
    """New normalized beamformers for one cell (no cluster penalty)."""
    return _vbar_cell_bcd(state, net, config, cell, 0.0)


def update_vbar_clustered(state: SwmmseState, net: NetworkInstance,
                          config: SwmmseConfig, cell: int) -> np.ndarray:
    """As update_vbar, with the per-(user, BS) group soft-threshold that
    shrinks serving clusters."""
    lam = resolved_cluster_penalty(net, config)[cell]
    return _vbar_cell_bcd(state, net, config, cell, float(lam))


def _record(history: dict, label: str, plain: float, ridge: float):
    history["block_label"].append(label)
    history["block_objective"].append(plain)
    history["block_ridge"].append(ridge)


def _bcd_loop(net: NetworkInstance, config: SwmmseConfig, state: SwmmseState,
              mu: np.ndarray, update_activation: bool) -> tuple[SwmmseState, dict, str, int]:
    top = net.topology
    lam_vec = resolved_cluster_penalty(net, config)
    clustered = bool(np.any(lam_vec > 0))
    history = {"objective": [], "block_label": [], "block_objective": [],
               "block_ridge": []}

    def ridge_val():
        return config.v_reg * state.vbar.total_power()

    prev = weighted_mse_objective(state, net, mu)
    status, iters = MAX_ITERS, 0
    for it in range(1, config.max_outer_iters + 1):
        state.u = update_u(state, net)
        _record(history, "u", weighted_mse_objective(state, net, mu), ridge_val())
        state.w = update_weights(state, net)
        _record(history, "w", weighted_mse_objective(state, net, mu), ridge_val())
        for k in range(top.num_cells):
            if clustered:
                state.vbar.cells[k] = update_vbar_clustered(state, net, config, k)
            else:
                state.vbar.cells[k] = update_vbar(state, net, config, k)
        _record(history, "vbar", weighted_mse_objective(state, net, mu), ridge_val())
        if update_activation:
            for k in range(top.num_cells):
                state.alpha[k], deg = update_alpha(state, net, config, k)
                state.degenerate_alpha += deg
        obj = weighted_mse_objective(state, net, mu)
        _record(history, "alpha", obj, ridge_val())
        history["objective"].append(obj)
        iters = it
        if abs(prev - obj) <= config.obj_tol * max(1.0, abs(prev)):
            status = CONVERGED
            break
        prev = obj
    return state, history, status, iters


def _finish_report(net: NetworkInstance, config: SwmmseConfig, state: SwmmseState,
                   history: dict, status: str, iters: int, solver: str) -> SolveReport:
    v_eff = state.effective()
    tol = default_active_tol(net)
    rates = [rate(net, v_eff, i) for i in range(net.num_users)]
    m = net.topology.tx_antennas
    cluster_sizes = []
    for k in range(net.topology.num_cells):
        for i in range(net.topology.users_per_cell[k]):
            row = v_eff.cells[k][i]
            blocks = row.reshape(net.topology.bs_per_cell[k], m)
            cluster_sizes.append(int(np.sum(np.linalg.norm(blocks, axis=1) > tol)))
    active = tuple(int(net.topology.bs_offset(k) + q)
                   for k in range(net.topology.num_cells)
                   for q in range(net.topology.bs_per_cell[k])
                   if state.alpha[k][q] != 0.0)
    return SolveReport(
        solver=solver,
        status=status,
        iterations=iters,
        total_power=v_eff.total_power(),
        active_bs=active,
        termination_reason=("objective change below tolerance"
                            if status == CONVERGED else "iteration limit reached"),
        history=history,
        beamformers=v_eff,
        sum_rate=float(sum(rates)),
        alpha=[a.copy() for a in state.alpha],
        per_user_rates=rates,
        cluster_sizes=cluster_sizes,
        diagnostics={"degenerate_alpha_coords": state.degenerate_alpha},
    )


def swmmse_solve(net: NetworkInstance, config: SwmmseConfig,
                 vbar_init: BeamformerSet | None = None) -> SolveReport:
    """Cycle u, w, vbar, alpha until the penalized objective settles.

    An all-zero activation vector is a valid (empty-network) stationary
    point and is reported as such.
    """
    config.validate()
    mu = resolved_mu(net, config)
    state = initial_state(net, vbar_init)
    state, history, status, iters = _bcd_loop(net, config, state, mu,
                                              update_activation=True)
    rep = _finish_report(net, config, state, history, status, iters, "swmmse")
    rep.diagnostics["final_vbar"] = state.vbar
    return rep


def debias_swmmse(net: NetworkInstance, config: SwmmseConfig,
                  alpha_star: list[np.ndarray], vbar: BeamformerSet) -> SolveReport:
    """Penalty-free refinement on the support found by the sparse solve.

    Activation scalars are pinned to sign(alpha*); the starting normalized
    beamformers absorb |alpha*| so the first iterate reproduces the sparse
    solution's effective beamformers, which the refinement then only
    improves.
    """
    config.validate()
    top = net.topology
    m = top.tx_antennas
    start = vbar.copy()
    for k in range(top.num_cells):
        start.cells[k] *= np.repeat(np.abs(alpha_star[k]), m)[None, :]
    state = initial_state(net, start)
    state.alpha = [np.sign(a) for a in alpha_star]
    mu = np.zeros(net.num_bs)
    state, history, status, iters = _bcd_loop(net, config, state, mu,
                                              update_activation=False)
    return _finish_report(net, config, state, history, status, iters, "swmmse-debias")


def reweight_mu(config: SwmmseConfig, alpha: np.ndarray,
                mu0: np.ndarray | float) -> np.ndarray:
    """Next-round activation penalties: mu0 / (|alpha| + eps)."""
    if config.reweight_eps <= 0:
        raise ConfigError("reweight_eps must be positive")
    alpha = np.abs(np.asarray(alpha, dtype=float))
    mu0 = np.broadcast_to(np.asarray(mu0, dtype=float), alpha.shape)
    return mu0 / (alpha + config.reweight_eps)


def solve_sumrate(net: NetworkInstance, config: SwmmseConfig) -> tuple[SolveReport, list[SolveReport]]:
    """Reweighted sparse solve followed by the penalty-free refinement.

    Reweighting stops when no further BS is dropped or fewer than
    ``min_active_fraction`` of the BSs remain active.  Returns the final
    (debiased) report plus the per-round sparse reports.
    """
    config.validate()
    mu0 = resolved_mu(net, config)
    if not np.any(mu0 > 0):
        rep = swmmse_solve(net, config)
        deb = debias_swmmse(net, config, rep.alpha, rep.diagnostics["final_vbar"])
        return deb, [rep]

    rounds: list[SolveReport] = []
    mu = mu0.copy()
    vbar_start = None
    best = None
    for _ in range(config.reweight_rounds):
        cfg = replace(config, mu=mu)
        rep = swmmse_solve(net, cfg, vbar_init=vbar_start)
        rounds.append(rep)
        if best is None or len(rep.active_bs) <= len(best.active_bs):
            best = rep
        if len(rounds) > 1 and len(rep.active_bs) >= len(rounds[-2].active_bs):
            break
        if len(rep.active_bs) < config.min_active_fraction * net.num_bs:
            break
        mu = reweight_mu(config, np.concatenate([np.asarray(a) for a in rep.alpha]), mu0)
        vbar_start = rep.diagnostics["final_vbar"]
    deb = debias_swmmse(net, config, [np.asarray(a) for a in best.alpha],
                        best.diagnostics["final_vbar"])
    deb.diagnostics["reweight_active_counts"] = [len(r.active_bs) for r in rounds]
    return deb, rounds


def wmmse_baseline(net: NetworkInstance, config: SwmmseConfig,
                   active: set[int] | tuple[int, ...] | None = None) -> SolveReport:
    """Plain weighted-MMSE sum-rate solve (activation pinned to 1), optionally
    restricted to a BS subset."""
    cfg = replace(config, mu=0.0, cluster_penalty=0.0)
    if active is None:
        state = initial_state(net)
        mu = np.zeros(net.num_bs)
        state, history, status, iters = _bcd_loop(net, cfg, state, mu,
                                                  update_activation=False)
        return _finish_report(net, cfg, state, history, status, iters, "wmmse")
    reduced, keep = restrict_to_bs(net, active)
    rep = wmmse_baseline(reduced, config)
    full_v = embed_beamformers(net.topology, rep.beamformers, keep)
    rep.beamformers = full_v
    rep.total_power = full_v.total_power()
    rep.active_bs = full_v.active_set(default_active_tol(net))
    rep.sum_rate = float(sum(rate(net, full_v, i) for i in range(net.num_users)))
    rep.per_user_rates = [rate(net, full_v, i) for i in range(net.num_users)]
    return rep
