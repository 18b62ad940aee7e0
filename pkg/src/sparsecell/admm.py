"""Operator-splitting solver for QoS-constrained power minimization with
group-sparse base-station activation.

The problem: minimize sum_q beta_q ||v^q||_2 + theta * sum_q ||v^q||_2^2
subject to per-BS power caps, per-user SINR targets (written as second-order
cone constraints on the received-signal copies), over MISO beamformers v.
With beta == 0 and theta == 1 this is plain minimum-power beamforming.

The splitting duplicates three quantities so each half-iterate has a closed
form: per-BS copies w of the beamformers (carrying the group penalty and the
power caps), received-signal scalars K[r, t] = h_r^H v_t (carrying the cone
constraints), and per-user noise copies kappa.  One iteration is

  1. project (K rows, kappa) onto the per-user cones,
  2. group-shrink each w block inside its power ball,
  3. solve the per-cell regularized least squares for v,
  4. dual ascent on the three consensus gaps.

All four steps decouple across users / BSs / cells respectively.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ConfigError, InfeasibleError
from .network import (BeamformerSet, NetworkInstance, default_active_tol,
                      embed_beamformers, restrict_to_bs)
from .report import CONVERGED, INFEASIBLE, MAX_ITERS, SolveReport


@dataclass
class AdmmConfig:
    rho: float = 5.0
    beta: float | np.ndarray = 0.0        # per-BS group weights (scalar broadcasts)
    theta: float | None = None            # None: 1/sum(P) if any beta > 0, else 1.0
    eps_tol: float = 1e-4
    max_iters: int = 2000
    reweight_eps: float = 1e-6
    reweight_rounds: int = 6
    infeasible_iter_cap: int = 2000

    def validate(self):
        if self.rho <= 0:
            raise ConfigError("rho must be positive")
        if np.any(np.asarray(self.beta) < 0):
            raise ConfigError("beta weights must be nonnegative")
        if self.theta is not None and self.theta <= 0:
            raise ConfigError("theta must be positive")
        if self.eps_tol <= 0 or self.max_iters < 1 or self.infeasible_iter_cap < 1:
            raise ConfigError("tolerance and iteration limits must be positive")
        if self.reweight_eps <= 0:
            raise ConfigError("reweight_eps must be positive")


def resolved_penalties(net: NetworkInstance, config: AdmmConfig) -> tuple[np.ndarray, float]:
    """Per-BS beta array and the effective power-scaling theta."""
    beta = np.broadcast_to(np.asarray(config.beta, dtype=float), (net.num_bs,)).copy()
    if config.theta is not None:
        theta = float(config.theta)
    elif np.any(beta > 0):
        theta = 1.0 / float(np.sum(net.power_budget))
    else:
        theta = 1.0
    return beta, theta


@dataclass
class AdmmState:
    """All primal copies and duals of one solve.

    K / mu are (n_users, n_users); entry [r, t] pairs receiving user r with
    the beamformer of user t.  lam mirrors the beamformer layout.
    """

    V: BeamformerSet
    W: BeamformerSet
    K: np.ndarray
    kappa: np.ndarray
    kappa_hat: np.ndarray
    mu: np.ndarray
    lam: list[np.ndarray]
    delta: np.ndarray
    iteration: int = 0
    gamma: np.ndarray = field(default=None)   # last cone-projection multipliers


def cold_start(net: NetworkInstance) -> AdmmState:
    n = net.num_users
    top = net.topology
    return AdmmState(
        V=BeamformerSet.zeros(top),
        W=BeamformerSet.zeros(top),
        K=np.zeros((n, n), dtype=complex),
        kappa=net.noise_power ** 0.5,
        kappa_hat=net.noise_power ** 0.5,
        mu=np.zeros((n, n), dtype=complex),
        lam=[np.zeros_like(c) for c in BeamformerSet.zeros(top).cells],
        delta=np.zeros(n),
    )


def received_signal_matrix(net: NetworkInstance, v: BeamformerSet) -> np.ndarray:
    """Scalar received signals over (receiving user r, transmitting user t):
    entry [r, t] is what user r hears from user t's beamformer."""
    cols = []
    for l in range(net.topology.num_cells):
        S = net.miso_cell_channel(l)                   # (n, M*Q_l), rows: channels
        cols.append(S @ v.cells[l].T)                  # (n, I_l)
    return np.hstack(cols)


def soc_project_rows(targets: np.ndarray, kappa_targets: np.ndarray,
                     tau: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact row-wise Euclidean projection onto the convex cone
    K_rr >= sqrt(tau_r) * ||(kappa_r, K_r,offdiag)||  with K_rr real.

    `targets` is (n, n) with the direct term on the diagonal (its imaginary
    part is dropped: the feasible diagonal is real); `kappa_targets` is (n,).
    Three cases per row: target already in the cone (kept); target in the
    polar cone (projected to the apex, everything zero); otherwise the
    boundary point, where the direct term moves up by gamma/2 and the
    off-diagonal/noise entries shrink by a common factor.  Returns
    (K, kappa, gamma) with gamma the cone multipliers.
    """
    if np.any(tau <= 0):
        raise ConfigError("SINR targets must be positive")
    s = np.real(np.diagonal(targets))
    diag_sq = np.abs(np.diagonal(targets)) ** 2
    y_sq = np.sum(np.abs(targets) ** 2, axis=1) - diag_sq + kappa_targets ** 2
    y_sq = np.maximum(y_sq, 0.0)
    y_norm = np.sqrt(y_sq)
    root_tau = np.sqrt(tau)
    underline = root_tau * y_norm
    keep = s >= underline
    apex = (~keep) & (root_tau * s <= -y_norm)

    gamma = np.where(keep, 0.0, 2.0 * (underline - s) / (1.0 + tau))
    krr = 0.5 * gamma + s                      # = (underline + tau*s)/(1+tau) > 0 off-apex
    kbar = krr / root_tau
    denom = kbar + 0.5 * gamma * root_tau      # equals y_norm on the boundary branch
    scale = np.where(keep, 1.0, kbar / np.where(denom > 0, denom, 1.0))
    scale = np.where(apex, 0.0, scale)

    K = targets * scale[:, None]
    np.fill_diagonal(K, np.where(keep, s, np.where(apex, 0.0, krr)))
    kappa = kappa_targets * scale
    return K, kappa, gamma


def update_K_kappa(state: AdmmState, net: NetworkInstance, config: AdmmConfig,
                   user: int) -> tuple[np.ndarray, float]:
    """Cone projection for one user's received-signal copies.

    Returns the new row of K (length n_users) and the new kappa.  Does not
    mutate the state.
    """
    rho = config.rho
    t_full = received_signal_matrix(net, state.V)
    row_target = t_full[user] - state.mu[user] / rho
    kap_target = state.kappa_hat[user] - state.delta[user] / rho
    # soc_project_rows keys the direct term off the diagonal; reorder the row
    # so the direct entry sits at position [0, 0] of a single-row call.
    order = [user] + [t for t in range(net.num_users) if t != user]
    reordered = row_target[order][None, :]
    K_row, kappa, _ = soc_project_rows(reordered, np.array([kap_target]),
                                       np.array([net.sinr_target[user]]))
    out = np.empty(net.num_users, dtype=complex)
    out[order] = K_row[0]
    return out, float(kappa[0])


def shrink_w_block(b: np.ndarray, beta: float, rho: float, budget: float) -> np.ndarray:
    """Closed-form minimizer of  beta*||w|| + (rho/2)*||w - b||^2  over ||w||^2 <= budget."""
    norm_b = np.linalg.norm(b)
    if rho * norm_b <= beta:
        return np.zeros_like(b)
    shrunk = b * ((rho * norm_b - beta) / (rho * norm_b))
    if np.sum(np.abs(shrunk) ** 2) <= budget:
        return shrunk
    return np.sqrt(budget) * b / norm_b


def update_w(state: AdmmState, net: NetworkInstance, config: AdmmConfig,
             bs: int) -> np.ndarray:
    """New per-BS beamformer copy for the given global BS index, shape (I_k, M)."""
    top = net.topology
    beta, _ = resolved_penalties(net, config)
    k = int(top.bs_cell[bs])
    q = bs - top.bs_offset(k)
    m = top.tx_antennas
    b = state.V.cells[k][:, q * m:(q + 1) * m] + state.lam[k][:, q * m:(q + 1) * m] / config.rho
    return shrink_w_block(b.ravel(), float(beta[bs]), config.rho,
                          float(net.power_budget[bs])).reshape(b.shape)


class _CellSolveCache:
    """Per-cell factorization of the v-update normal matrix (iteration invariant)."""

    def __init__(self, net: NetworkInstance, rho: float, theta: float):
        self.H = []        # (M*Q_k, n_users): adjoint of the cell's channel stack
        self.factor = []
        for k in range(net.topology.num_cells):
            Hk = net.miso_cell_channel(k).conj().T.copy()
            dim = Hk.shape[0]
            A = (1.0 + 2.0 * theta / rho) * np.eye(dim, dtype=complex) + Hk @ Hk.conj().T
            self.H.append(Hk)
            self.factor.append(cho_factor(A))


def update_v(state: AdmmState, net: NetworkInstance, config: AdmmConfig,
             cell: int, cache: _CellSolveCache | None = None) -> tuple[np.ndarray, np.ndarray]:
    """New beamformers for every user of a cell, plus their noise copies.

    Returns (V_k of shape (I_k, M*Q_k), kappa_hat slice).  kappa_hat is
    pinned to the noise standard deviations.
    """
    rho = config.rho
    if cache is None:
        _, theta = resolved_penalties(net, config)
        cache = _CellSolveCache(net, rho, theta)
    top = net.topology
    users = list(top.user_range(cell))
    Hk = cache.H[cell]
    rhs = Hk @ (rho * state.K[:, users] + state.mu[:, users]) \
        + (rho * state.W.cells[cell] - state.lam[cell]).T
    V_k = (cho_solve(cache.factor[cell], rhs) / rho).T
    kappa_hat = net.noise_power[users] ** 0.5
    return V_k, kappa_hat


def update_duals(state: AdmmState, net: NetworkInstance, config: AdmmConfig) -> AdmmState:
    """Dual ascent on the three consensus constraints (in place)."""
    rho = config.rho
    signal = received_signal_matrix(net, state.V)
    state.mu += rho * (state.K - signal)
    for k in range(net.topology.num_cells):
        state.lam[k] += rho * (state.V.cells[k] - state.W.cells[k])
    state.delta += rho * (state.kappa - state.kappa_hat)
    return state


def objective_value(W: BeamformerSet, beta: np.ndarray, theta: float) -> float:
    """Group-sparsity objective evaluated at the per-BS copies."""
    norms = W.bs_norms()
    return float(np.sum(beta * norms) + theta * np.sum(norms ** 2))


def _residual_terms(state: AdmmState, net: NetworkInstance,
                    objective: float, prev_objective: float | None) -> dict:
    signal = received_signal_matrix(net, state.V)
    k_gap = np.max(np.abs(state.K - signal)) if state.K.size else 0.0
    k_scale = max(1.0, np.linalg.norm(state.K))
    v_norm = np.sqrt(state.V.total_power())
    w_norm = np.sqrt(state.W.total_power())
    vw_gap = max(np.max(np.abs(state.V.cells[k] - state.W.cells[k]))
                 for k in range(net.topology.num_cells))
    noise_gap = float(np.max(np.abs(state.kappa ** 2 - net.noise_power)))
    if prev_objective is None:
        obj_change = np.inf
    elif abs(prev_objective) > 0:
        obj_change = abs(objective - prev_objective) / abs(prev_objective)
    else:
        obj_change = 0.0 if objective == prev_objective else np.inf
    return {
        "consensus_signal": float(k_gap / k_scale),
        "consensus_copy": float(vw_gap / max(1.0, v_norm, w_norm)),
        "noise_gap": noise_gap,
        "objective_change": float(obj_change),
    }


def residual_metric(state: AdmmState, net: NetworkInstance, config: AdmmConfig,
                    prev_objective: float | None = None) -> float:
    """Stopping metric: max of the two normalized consensus gaps, the noise
    copy gap, and the relative objective change."""
    beta, theta = resolved_penalties(net, config)
    obj = objective_value(state.W, beta, theta)
    return max(_residual_terms(state, net, obj, prev_objective).values())


def augmented_lagrangian(state: AdmmState, net: NetworkInstance,
                         config: AdmmConfig) -> float:
    """Value of the augmented Lagrangian the block updates minimize exactly."""
    beta, theta = resolved_penalties(net, config)
    rho = config.rho
    signal = received_signal_matrix(net, state.V)
    norms_w = state.W.bs_norms()
    norms_v = state.V.bs_norms()
    val = float(np.sum(beta * norms_w) + theta * np.sum(norms_v ** 2))
    val += float(np.dot(state.delta, state.kappa - state.kappa_hat))
    val += float(np.real(np.sum(np.conj(state.mu) * (state.K - signal))))
    for k in range(net.topology.num_cells):
        val += float(np.real(np.sum(np.conj(state.lam[k])
                                    * (state.V.cells[k] - state.W.cells[k]))))
    val += 0.5 * rho * float(np.sum(np.abs(state.K - signal) ** 2))
    val += 0.5 * rho * float(sum(np.sum(np.abs(state.V.cells[k] - state.W.cells[k]) ** 2)
                                 for k in range(net.topology.num_cells)))
    val += 0.5 * rho * float(np.sum((state.kappa - state.kappa_hat) ** 2))
    return val


def _step(state: AdmmState, net: NetworkInstance, config: AdmmConfig,
          beta: np.ndarray, theta: float, cache: _CellSolveCache):
    """One full iteration: block A (K, kappa, w), block B (v), dual ascent."""
    top = net.topology
    rho = config.rho
    m = top.tx_antennas

    signal = received_signal_matrix(net, state.V)
    targets = signal - state.mu / rho
    kap_targets = state.kappa_hat - state.delta / rho
    state.K, state.kappa, state.gamma = soc_project_rows(
        targets, kap_targets, net.sinr_target)

    for k in range(top.num_cells):
        Vk = state.V.cells[k]
        Lk = state.lam[k]
        for q in range(top.bs_per_cell[k]):
            sl = slice(q * m, (q + 1) * m)
            b = (Vk[:, sl] + Lk[:, sl] / rho).ravel()
            bs = top.bs_offset(k) + q
            state.W.cells[k][:, sl] = shrink_w_block(
                b, float(beta[bs]), rho, float(net.power_budget[bs])).reshape(Vk[:, sl].shape)

    for k in range(top.num_cells):
        users = list(top.user_range(k))
        rhs = cache.H[k] @ (rho * state.K[:, users] + state.mu[:, users]) \
            + (rho * state.W.cells[k] - state.lam[k]).T
        state.V.cells[k] = (cho_solve(cache.factor[k], rhs) / rho).T
    state.kappa_hat = net.noise_power ** 0.5

    update_duals(state, net, config)
    state.iteration += 1


def admm_solve(net: NetworkInstance, config: AdmmConfig,
               warm_start: BeamformerSet | None = None) -> SolveReport:
    """Run the splitting method to the stopping tolerance.

    The returned beamformers are the per-BS copies w, which satisfy the
    power caps exactly at every iterate; SINR targets are met up to the
    consensus residual.  A run that fails to converge within
    ``infeasible_iter_cap`` iterations is labeled infeasible (heuristic,
    not a certificate).
    """
    config.validate()
    if net.sinr_target is None:
        raise ConfigError("power minimization requires SINR targets")
    if net.topology.rx_antennas != 1:
        raise ConfigError("power minimization path requires single-antenna receivers")
    beta, theta = resolved_penalties(net, config)
    cache = _CellSolveCache(net, config.rho, theta)

    state = cold_start(net)
    if warm_start is not None:
        state.V = warm_start.copy()
        state.W = warm_start.copy()
        state.K = received_signal_matrix(net, state.V)

    history = {"objective": [], "consensus_signal": [], "consensus_copy": [],
               "noise_gap": [], "objective_change": []}
    prev_obj = None
    status, reason = MAX_ITERS, "iteration limit reached"
    for _ in range(config.max_iters):
        _step(state, net, config, beta, theta, cache)
        obj = objective_value(state.W, beta, theta)
        terms = _residual_terms(state, net, obj, prev_obj)
        history["objective"].append(obj)
        for name, val in terms.items():
            history[name].append(val)
        prev_obj = obj
        if max(terms.values()) < config.eps_tol:
            status, reason = CONVERGED, f"residual below {config.eps_tol:g}"
            break
    if status != CONVERGED and state.iteration >= config.infeasible_iter_cap:
        status = INFEASIBLE
        reason = f"no convergence within {config.infeasible_iter_cap} iterations"

    final = state.W.copy()
    tol = default_active_tol(net)
    return SolveReport(
        solver="admm-power",
        status=status,
        iterations=state.iteration,
        total_power=final.total_power(),
        active_bs=final.active_set(tol),
        termination_reason=reason,
        history=history,
        beamformers=final,
    )


def reweight(config: AdmmConfig, w_solution: BeamformerSet,
             beta0: np.ndarray | float) -> np.ndarray:
    """Next-round group weights: beta0 / (||w^q|| + eps)."""
    if config.reweight_eps <= 0:
        raise ConfigError("reweight_eps must be positive")
    beta0 = np.broadcast_to(np.asarray(beta0, dtype=float),
                            (w_solution.topology.num_bs,))
    return beta0 / (w_solution.bs_norms() + config.reweight_eps)


def solve_with_reweighting(net: NetworkInstance, config: AdmmConfig,
                           beta0: np.ndarray | float | None = None) -> list[SolveReport]:
    """Repeated solves with adaptively reweighted group penalties.

    Round 1 uses beta0 (defaults to config.beta); each later round divides
    beta0 by the previous solution's per-BS norms.  Rounds warm-start from
    the previous solution.  Returns one report per round.
    """
    config.validate()
    if beta0 is None:
        beta0 = config.beta
    beta0 = np.broadcast_to(np.asarray(beta0, dtype=float), (net.num_bs,)).copy()
    if not np.any(beta0 > 0):
        raise ConfigError("reweighting needs a positive initial penalty")

    reports: list[SolveReport] = []
    beta = beta0.copy()
    warm = None
    from dataclasses import replace
    for _ in range(config.reweight_rounds):
        cfg = replace(config, beta=beta)
        rep = admm_solve(net, cfg, warm_start=warm)
        reports.append(rep)
        if rep.status == INFEASIBLE:
            break
        beta = reweight(config, rep.beamformers, beta0)
        warm = rep.beamformers
    return reports


def debias(net: NetworkInstance, config: AdmmConfig,
           active_set: set[int] | tuple[int, ...]) -> SolveReport:
    """Re-solve for minimum power on the given support (no sparsity penalty).

    BSs outside the support keep zero beamformers.  Raises InfeasibleError
    when a cell with users would be left without any BS.
    """
    if len(set(active_set)) == 0:
        raise InfeasibleError("empty active set cannot serve users with SINR targets")
    from dataclasses import replace
    reduced, keep = restrict_to_bs(net, active_set)
    cfg = replace(config, beta=0.0, theta=1.0)
    rep = admm_solve(reduced, cfg)
    full_v = embed_beamformers(net.topology, rep.beamformers, keep)
    tol = default_active_tol(net)
    return SolveReport(
        solver="admm-power-debias",
        status=rep.status,
        iterations=rep.iterations,
        total_power=full_v.total_power(),
        active_bs=full_v.active_set(tol),
        termination_reason=rep.termination_reason,
        history=rep.history,
        beamformers=full_v,
    )


def sinr_slack(net: NetworkInstance, v: BeamformerSet) -> np.ndarray:
    """Per-user relative SINR margin (positive means target met)."""
    from .network import sinr as _sinr
    vals = np.array([_sinr(net, v, i) for i in range(net.num_users)])
    return vals / net.sinr_target - 1.0
