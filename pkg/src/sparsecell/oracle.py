"""Independent ground-truth solvers for small instances.

Three families:

* single-cell scalar power-control instances (nonnegative powers, additive
  gains) with brute-force minimum-active-set enumeration backed by an LP
  feasibility check,
* the graph-to-power-control instance construction used to stress the
  activation solvers, plus an exact minimum vertex cover,
* an exact minimum-power oracle for single-cell MISO beamforming built on
  the classical dual fixed point + tight-SINR power system.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import ConfigError, DimensionError, OracleError
from .network import NetworkInstance

SUBSET_ENUM_CAP = 12     # 2^12 subsets; larger instances are rejected


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph; vertices are 1..num_vertices."""

    num_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for (u, v) in self.edges:
            if u == v:
                raise ConfigError("self-loops are not allowed")
            if not (1 <= u <= self.num_vertices and 1 <= v <= self.num_vertices):
                raise ConfigError("edge endpoint out of range")

    @classmethod
    def from_edge_list(cls, text: str) -> "Graph":
        """Parse 'Q' on the first line then 'u v' pairs, 1-based."""
        lines = [ln for ln in (s.strip() for s in text.splitlines()) if ln]
        if not lines:
            raise ConfigError("empty graph document")
        q = int(lines[0])
        edges = []
        for ln in lines[1:]:
            u, v = (int(tok) for tok in ln.split())
            edges.append((min(u, v), max(u, v)))
        return cls(q, tuple(sorted(set(edges))))

    def to_edge_list(self) -> str:
        out = [str(self.num_vertices)]
        out += [f"{u} {v}" for (u, v) in self.edges]
        return "\n".join(out) + "\n"


@dataclass(frozen=True)
class PowerControlInstance:
    """Single-cell scalar power-control data: user i's SINR is
    sum_q p[i,q] g[i,q] / (sigma2[i] + sum_{j != i} sum_q p[j,q] g[i,q])."""

    gains: np.ndarray        # (Q, Q), users x BSs, nonnegative
    sinr_target: np.ndarray  # (Q,)
    noise_power: np.ndarray  # (Q,)
    power_budget: np.ndarray # (Q,)

    def __post_init__(self):
        q = self.gains.shape[0]
        if self.gains.shape != (q, q):
            raise DimensionError("gain matrix must be square (users x BSs)")
        for arr, name in ((self.sinr_target, "targets"), (self.noise_power, "noise"),
                          (self.power_budget, "budgets")):
            if arr.shape != (q,):
                raise DimensionError(f"{name} must have one entry per user/BS")
        if np.any(~np.isfinite(self.gains)) or np.any(self.gains < 0):
            raise ConfigError("gains must be finite and nonnegative")

    @property
    def size(self) -> int:
        return self.gains.shape[0]


def vertex_cover_instance(g: Graph) -> PowerControlInstance:
    """Power-control instance whose gain pattern is the closed adjacency of
    the graph: g[i, q] = 1 iff i == q or {i, q} is an edge; targets 1/Q^2,
    noise Q, budgets Q."""
    q = g.num_vertices
    gains = np.eye(q)
    for (u, v) in g.edges:
        gains[u - 1, v - 1] = 1.0
        gains[v - 1, u - 1] = 1.0
    return PowerControlInstance(
        gains=gains,
        sinr_target=np.full(q, 1.0 / q ** 2) if q else np.zeros(0),
        noise_power=np.full(q, float(q)),
        power_budget=np.full(q, float(q)),
    )


def _sinr_ok(inst: PowerControlInstance, p: np.ndarray, slack: float = 0.0) -> bool:
    signal = np.sum(p * inst.gains, axis=1)
    interf = np.einsum('jq,iq->i', p, inst.gains) - signal
    return bool(np.all(signal + slack >= inst.sinr_target * (inst.noise_power + interf)))


def feasible_with_set(inst: PowerControlInstance, active: set[int] | tuple[int, ...],
                      size_cap: int = SUBSET_ENUM_CAP) -> bool:
    """Whether nonnegative powers supported on `active` (0-based BS indices),
    within budgets, can meet every SINR target.

    Tries the all-ones assignment on the active columns first, then decides
    exactly with an LP feasibility solve.
    """
    q = inst.size
    if q > size_cap:
        raise ConfigError(f"instance size {q} exceeds enumeration cap {size_cap}")
    if q == 0:
        return True
    active = sorted(set(int(a) for a in active))
    if any(a < 0 or a >= q for a in active):
        raise ConfigError("active set contains an invalid BS index")

    if not active:
        return bool(np.all(inst.sinr_target <= 0))

    # a user with zero gain to every active BS can never meet a positive target
    reach = inst.gains[:, active].max(axis=1)
    if np.any((reach <= 0) & (inst.sinr_target > 0)):
        return False

    p = np.zeros((q, q))
    p[:, active] = 1.0
    if np.all(np.sum(p, axis=0) <= inst.power_budget) and _sinr_ok(inst, p):
        return True

    # LP over p[i, a] for a in active: SINR rows are linear in the powers.
    na = len(active)
    nvar = q * na
    g_act = inst.gains[:, active]                       # (Q users, na)
    a_ub = []
    b_ub = []
    for i in range(q):
        row = np.zeros((q, na))
        row += inst.sinr_target[i] * g_act[i][None, :]  # interference side
        row[i] -= (1.0 + inst.sinr_target[i]) * g_act[i]  # move own signal across
        # signal - tau * interference >= tau * noise, with interference
        # excluding user i's own powers:
        #   sum_a p[i,a] g[i,a] - tau_i * sum_{j != i} sum_a p[j,a] g[i,a] >= tau_i sigma2_i
        a_ub.append(row.ravel())
        b_ub.append(-inst.sinr_target[i] * inst.noise_power[i])
    for idx, a in enumerate(active):
        row = np.zeros((q, na))
        row[:, idx] = 1.0
        a_ub.append(row.ravel())
        b_ub.append(inst.power_budget[a])
    a_ub = np.asarray(a_ub)
    b_ub = np.asarray(b_ub)
    res = linprog(c=np.zeros(nvar), A_ub=a_ub, b_ub=b_ub,
                  bounds=[(0, None)] * nvar, method="highs")
    return bool(res.status == 0)


def min_active_set(inst: PowerControlInstance,
                   size_cap: int = SUBSET_ENUM_CAP) -> tuple[int, tuple[int, ...]]:
    """Exhaustive minimum number of transmitting BSs (and one witness set)."""
    q = inst.size
    if q > size_cap:
        raise ConfigError(f"instance size {q} exceeds enumeration cap {size_cap}")
    for size in range(q + 1):
        for subset in itertools.combinations(range(q), size):
            if feasible_with_set(inst, subset, size_cap=size_cap):
                return size, subset
    raise OracleError("instance infeasible even with every BS active")


def min_vertex_cover(g: Graph) -> int:
    """Exact minimum vertex cover size by subset enumeration."""
    if g.num_vertices > SUBSET_ENUM_CAP:
        raise ConfigError("graph too large for exhaustive cover search")
    if not g.edges:
        return 0
    verts = range(1, g.num_vertices + 1)
    for size in range(g.num_vertices + 1):
        for subset in itertools.combinations(verts, size):
            chosen = set(subset)
            if all(u in chosen or v in chosen for (u, v) in g.edges):
                return size
    return g.num_vertices


@dataclass(frozen=True)
class MisoOracleResult:
    status: str                      # 'optimal' | 'infeasible' | 'budget_exceeded'
    total_power: float | None
    user_powers: np.ndarray | None
    dual_value: float | None


def miso_power_oracle(net: NetworkInstance,
                      active: set[int] | tuple[int, ...] | None = None,
                      fp_tol: float = 1e-12, fp_iters: int = 20000) -> MisoOracleResult:
    """Exact minimum total transmit power meeting every SINR target for a
    single-cell network with single-antenna receivers.

    Beamformer directions come from the dual fixed point
        lam_i <- tau_i / (h_i^H (I + sum_{j != i} lam_j h_j h_j^H)^{-1} h_i),
    after which the tight-SINR constraints are a square linear system in the
    per-user powers.  Per-BS budgets are only verified afterwards: a
    'budget_exceeded' status means the caps bind and this oracle does not
    certify the optimum.  Internal consistency (zero duality gap, targets
    met with equality) is asserted.
    """
    top = net.topology
    if top.num_cells != 1 or top.rx_antennas != 1:
        raise ConfigError("oracle requires a single cell and single-antenna users")
    if net.sinr_target is None:
        raise ConfigError("oracle requires SINR targets")

    m = top.tx_antennas
    all_bs = list(range(top.num_bs))
    active = all_bs if active is None else sorted(set(int(a) for a in active))
    if not active:
        return MisoOracleResult("infeasible", None, None, None)
    cols = [b * m + j for b in active for j in range(m)]
    # rows h_i on the support; conjugated so that the received scalar of the
    # network model (channel-row dot v) equals h_i^H v in the formulas below
    H = net.miso_cell_channel(0)[:, cols].conj()
    n = top.num_users
    tau = net.sinr_target
    sigma2 = net.noise_power

    if np.any(np.linalg.norm(H, axis=1) == 0):
        return MisoOracleResult("infeasible", None, None, None)

    def quad_forms(lam):
        """h_i^H Psi_i^{-1} h_i with Psi_i = I + sum_{j != i} lam_j h_j h_j^H,
        via the full Psi and a rank-one downdate."""
        psi = eye + (H.T * lam) @ H.conj()
        full = np.real(np.einsum('id,di->i', H.conj(), np.linalg.solve(psi, H.T)))
        denom = 1.0 - lam * full
        return np.where(denom > 0, full / denom, np.inf), psi

    lam = np.zeros(n)
    dim = H.shape[1]
    eye = np.eye(dim, dtype=complex)
    converged = False
    for _ in range(fp_iters):
        quad, _ = quad_forms(lam)
        if np.any(quad <= 0) or np.any(~np.isfinite(quad)):
            return MisoOracleResult("infeasible", None, None, None)
        new_lam = tau / quad
        if np.any(~np.isfinite(new_lam)) or np.max(new_lam) > 1e14:
            return MisoOracleResult("infeasible", None, None, None)
        gap = np.max(np.abs(new_lam - lam) / np.maximum(1.0, new_lam))
        lam = new_lam
        if gap < fp_tol:
            converged = True
            break
    if not converged:
        return MisoOracleResult("infeasible", None, None, None)

    _, psi = quad_forms(lam)
    dirs = np.linalg.solve(psi, H.T).T                   # row i = Psi^{-1} h_i
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)

    cross = np.abs(dirs.conj() @ H.T) ** 2               # [j, i] = |u_j^H h_i|^2
    recv = cross.T                                       # [i, j]: power at i from j's direction
    own = np.diag(recv).copy()
    F = np.diag(own / tau) - (recv - np.diag(own))
    powers = np.linalg.solve(F, sigma2)
    if np.any(powers < -1e-12):
        return MisoOracleResult("infeasible", None, None, None)
    powers = np.maximum(powers, 0.0)
    total = float(np.sum(powers))
    dual = float(np.sum(lam * sigma2))
    if not np.isclose(total, dual, rtol=1e-6, atol=1e-9):
        raise OracleError(f"duality gap: primal {total} vs dual {dual}")

    sinr_vals = (powers * own) / (sigma2 + recv @ powers - powers * own)
    if not np.allclose(sinr_vals, tau, rtol=1e-6):
        raise OracleError("tight-SINR system inconsistent")

    v = dirs * np.sqrt(powers)[:, None]                  # rows: scaled beamformers
    per_bs = np.sum(np.abs(v.reshape(n, len(active), m)) ** 2, axis=(0, 2))
    if np.any(per_bs > net.power_budget[active] * (1 + 1e-9)):
        return MisoOracleResult("budget_exceeded", total, powers, dual)
    return MisoOracleResult("optimal", total, powers, dual)
