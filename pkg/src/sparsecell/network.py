"""Multi-cell HetNet problem data: topology, channels, beamformers and link metrics.

Layout conventions used throughout the package:

* Cells are indexed ``k = 0..K-1``.  Cell ``k`` owns ``Q_k`` base stations
  (BS) and ``I_k`` users.  BS 0 of every cell sits at the cell center (the
  macro BS); the remaining BSs and all users are dropped uniformly in a
  disk around the center.
* Global BS/user indices enumerate cells in order, entities within a cell
  in order.  ``bs_cell[q]`` / ``user_cell[i]`` map global to cell index.
* Every BS has ``M`` transmit antennas, every user ``N`` receive antennas.
* A user is served jointly by the BSs of its own cell only.  Its stacked
  beamformer has length ``M * Q_k`` (blocks ordered by in-cell BS index).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError

# Users and BSs closer than this are treated as 10 m apart; the pathloss
# law (200/d)^3 diverges as d -> 0.
MIN_LINK_DISTANCE_M = 10.0

CELL_RADIUS_M = 1000.0


def _hex_centers(num_cells: int, spacing: float) -> np.ndarray:
    """Cell centers on a hexagonal lattice, filled center-out, adjacent
    centers exactly `spacing` apart."""
    if num_cells < 1:
        raise ConfigError("need at least one cell")
    centers = [(0.0, 0.0)]
    # Axial hex directions.
    dirs = [(1.0, 0.0), (0.5, np.sqrt(3) / 2), (-0.5, np.sqrt(3) / 2),
            (-1.0, 0.0), (-0.5, -np.sqrt(3) / 2), (0.5, -np.sqrt(3) / 2)]
    ring = 1
    while len(centers) < num_cells:
        # Walk the ring starting from (ring, 0) in direction order.
        x, y = ring * dirs[0][0], ring * dirs[0][1]
        for d in range(6):
            step = dirs[(d + 2) % 6]
            for _ in range(ring):
                centers.append((x, y))
                x, y = x + step[0], y + step[1]
        ring += 1
    return np.asarray(centers[:num_cells]) * spacing


@dataclass(frozen=True)
class NetworkTopology:
    """Static geometry and counts of a multi-cell network."""

    num_cells: int
    bs_per_cell: tuple[int, ...]      # Q_k
    users_per_cell: tuple[int, ...]   # I_k
    tx_antennas: int                  # M
    rx_antennas: int                  # N
    cell_centers: np.ndarray          # (K, 2) meters
    bs_positions: np.ndarray          # (n_bs, 2) meters, global BS order
    user_positions: np.ndarray        # (n_users, 2) meters, global user order

    def __post_init__(self):
        if self.num_cells < 1 or self.tx_antennas < 1 or self.rx_antennas < 1:
            raise ConfigError("counts must be positive")
        if len(self.bs_per_cell) != self.num_cells or len(self.users_per_cell) != self.num_cells:
            raise DimensionError("per-cell counts must match num_cells")
        if any(q < 1 for q in self.bs_per_cell) or any(i < 1 for i in self.users_per_cell):
            raise ConfigError("every cell needs at least one BS and one user")
        if self.bs_positions.shape != (self.num_bs, 2):
            raise DimensionError("bs_positions shape mismatch")
        if self.user_positions.shape != (self.num_users, 2):
            raise DimensionError("user_positions shape mismatch")
        for arr in (self.cell_centers, self.bs_positions, self.user_positions):
            arr.flags.writeable = False

    @property
    def num_bs(self) -> int:
        return sum(self.bs_per_cell)

    @property
    def num_users(self) -> int:
        return sum(self.users_per_cell)

    @property
    def bs_cell(self) -> np.ndarray:
        return np.repeat(np.arange(self.num_cells), self.bs_per_cell)

    @property
    def user_cell(self) -> np.ndarray:
        return np.repeat(np.arange(self.num_cells), self.users_per_cell)

    def bs_offset(self, k: int) -> int:
        """Global index of the first BS of cell k."""
        return int(sum(self.bs_per_cell[:k]))

    def user_offset(self, k: int) -> int:
        """Global index of the first user of cell k."""
        return int(sum(self.users_per_cell[:k]))

    def bs_range(self, k: int) -> range:
        off = self.bs_offset(k)
        return range(off, off + self.bs_per_cell[k])

    def user_range(self, k: int) -> range:
        off = self.user_offset(k)
        return range(off, off + self.users_per_cell[k])


@dataclass(frozen=True)
class NetworkInstance:
    """Fixed problem data: channels, noise powers, SINR targets, budgets.

    ``channels[i, q]`` is the N x M matrix from BS q to user i (global
    indices).  Immutable after construction; all evaluation helpers below
    are pure functions of it.
    """

    topology: NetworkTopology
    channels: np.ndarray            # (n_users, n_bs, N, M) complex
    noise_power: np.ndarray         # (n_users,) watts
    power_budget: np.ndarray        # (n_bs,) watts
    sinr_target: np.ndarray | None = None   # (n_users,) linear; power-min path only
    _cell_stacks: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        top = self.topology
        if self.channels.shape != (top.num_users, top.num_bs, top.rx_antennas, top.tx_antennas):
            raise DimensionError("channel array shape does not match topology")
        if self.noise_power.shape != (top.num_users,) or np.any(self.noise_power <= 0):
            raise ConfigError("noise powers must be positive, one per user")
        if self.power_budget.shape != (top.num_bs,) or np.any(self.power_budget <= 0):
            raise ConfigError("power budgets must be positive, one per BS")
        if self.sinr_target is not None:
            if self.sinr_target.shape != (top.num_users,) or np.any(self.sinr_target <= 0):
                raise ConfigError("SINR targets must be positive, one per user")
        for arr in (self.channels, self.noise_power, self.power_budget):
            arr.flags.writeable = False
        if self.sinr_target is not None:
            self.sinr_target.flags.writeable = False

    @property
    def num_users(self) -> int:
        return self.topology.num_users

    @property
    def num_bs(self) -> int:
        return self.topology.num_bs

    def cell_channel(self, l: int) -> np.ndarray:
        """Stacked channel from all BSs of cell l to every user.

        Returns (n_users, N, M*Q_l); row i is the channel matrix through
        which cell l's transmissions reach user i.
        """
        if l not in self._cell_stacks:
            top = self.topology
            sel = self.channels[:, list(top.bs_range(l))]        # (n, Q_l, N, M)
            stacked = sel.transpose(0, 2, 1, 3).reshape(
                top.num_users, top.rx_antennas, top.bs_per_cell[l] * top.tx_antennas)
            stacked.flags.writeable = False
            self._cell_stacks[l] = stacked
        return self._cell_stacks[l]

    def miso_cell_channel(self, l: int) -> np.ndarray:
        """(n_users, M*Q_l) view of cell_channel for N == 1."""
        if self.topology.rx_antennas != 1:
            raise DimensionError("MISO channel view requires N == 1")
        return self.cell_channel(l)[:, 0, :]


class BeamformerSet:
    """Transmit beamformers for every (user, serving BS) pair.

    ``cells[k]`` is an (I_k, M*Q_k) complex array; row i is user i_k's
    stacked beamformer across its cell's BSs.  Only intra-cell serving
    links exist, so this storage is exhaustive.
    """

    def __init__(self, topology: NetworkTopology, cells: list[np.ndarray]):
        if len(cells) != topology.num_cells:
            raise DimensionError("one beamformer block per cell required")
        m = topology.tx_antennas
        for k, arr in enumerate(cells):
            want = (topology.users_per_cell[k], m * topology.bs_per_cell[k])
            if arr.shape != want:
                raise DimensionError(f"cell {k} beamformer block must have shape {want}")
        self.topology = topology
        self.cells = [np.asarray(a, dtype=complex) for a in cells]

    @classmethod
    def zeros(cls, topology: NetworkTopology) -> "BeamformerSet":
        m = topology.tx_antennas
        return cls(topology, [np.zeros((topology.users_per_cell[k], m * topology.bs_per_cell[k]),
                                       dtype=complex)
                              for k in range(topology.num_cells)])

    def copy(self) -> "BeamformerSet":
        return BeamformerSet(self.topology, [a.copy() for a in self.cells])

    def user_vector(self, user: int) -> np.ndarray:
        """Stacked beamformer of a global user index."""
        k = int(self.topology.user_cell[user])
        return self.cells[k][user - self.topology.user_offset(k)]

    def bs_block(self, k: int, q: int) -> np.ndarray:
        """(I_k, M) view: all users of cell k at in-cell BS q."""
        m = self.topology.tx_antennas
        return self.cells[k][:, q * m:(q + 1) * m]

    def bs_norms(self) -> np.ndarray:
        """Per-BS Euclidean norm of the stacked per-BS beamformer, global order."""
        out = np.empty(self.topology.num_bs)
        for k in range(self.topology.num_cells):
            for q in range(self.topology.bs_per_cell[k]):
                out[self.topology.bs_offset(k) + q] = np.linalg.norm(self.bs_block(k, q))
        return out

    def total_power(self) -> float:
        return float(sum(np.sum(np.abs(a) ** 2) for a in self.cells))

    def active_set(self, tol: float) -> tuple[int, ...]:
        if tol < 0:
            raise ConfigError("tolerance must be nonnegative")
        norms = self.bs_norms()
        return tuple(int(q) for q in np.flatnonzero(norms > tol))


def total_power(v: BeamformerSet) -> float:
    """Sum of squared beamformer norms over all BSs (watts)."""
    return v.total_power()


def active_bs_set(v: BeamformerSet, tol: float) -> set[int]:
    """Global indices of BSs whose stacked beamformer norm exceeds tol."""
    return set(v.active_set(tol))


def default_active_tol(net: NetworkInstance) -> float:
    """Scale-aware zero threshold for declaring a BS active."""
    return 1e-5 * float(np.sqrt(np.max(net.power_budget)))


@dataclass(frozen=True)
class NetworkParams:
    """Knobs for the random network generator (dB values converted at parse time)."""

    num_cells: int = 1
    bs_per_cell: int = 2            # includes the center BS
    users_per_cell: int = 2
    tx_antennas: int = 1
    rx_antennas: int = 1
    cell_spacing_m: float = 2000.0
    sinr_target_db: float = 15.0
    center_bs_budget_db: float = 10.0
    other_bs_budget_db: float = 5.0
    noise_power: float = 0.1        # linear watts

    def validate(self):
        if min(self.num_cells, self.bs_per_cell, self.users_per_cell,
               self.tx_antennas, self.rx_antennas) < 1:
            raise ConfigError("all counts must be >= 1")
        if self.cell_spacing_m <= 0 or self.noise_power <= 0:
            raise ConfigError("spacing and noise power must be positive")


def db_to_linear(x_db: float) -> float:
    return float(10.0 ** (x_db / 10.0))


def generate_network(params: NetworkParams, seed: int) -> NetworkInstance:
    """Draw a random network instance.

    One BS per cell center, the remaining BSs and all users uniform in a
    1000 m disk around it.  Channel entries are i.i.d. circularly symmetric
    complex Gaussian with per-link variance (200/d)^3 * L where
    10*log10(L) ~ N(0, 64) and d is the link distance (floored at 10 m).
    Deterministic for a fixed seed.
    """
    params.validate()
    rng = np.random.default_rng(seed)
    K, Q, I = params.num_cells, params.bs_per_cell, params.users_per_cell
    M, N = params.tx_antennas, params.rx_antennas
    centers = _hex_centers(K, params.cell_spacing_m)

    def disk_points(center, count):
        r = CELL_RADIUS_M * np.sqrt(rng.uniform(size=count))
        phi = rng.uniform(0, 2 * np.pi, size=count)
        return center + np.column_stack([r * np.cos(phi), r * np.sin(phi)])

    bs_pos, user_pos = [], []
    for k in range(K):
        bs_pos.append(centers[k][None, :])
        if Q > 1:
            bs_pos.append(disk_points(centers[k], Q - 1))
        user_pos.append(disk_points(centers[k], I))
    bs_pos = np.vstack(bs_pos)
    user_pos = np.vstack(user_pos)

    top = NetworkTopology(
        num_cells=K, bs_per_cell=(Q,) * K, users_per_cell=(I,) * K,
        tx_antennas=M, rx_antennas=N, cell_centers=centers,
        bs_positions=bs_pos, user_positions=user_pos)

    d = np.linalg.norm(user_pos[:, None, :] - bs_pos[None, :, :], axis=-1)
    d = np.maximum(d, MIN_LINK_DISTANCE_M)
    shadow_db = rng.normal(0.0, 8.0, size=d.shape)          # 10*log10(L) ~ N(0, 64)
    var = (200.0 / d) ** 3 * 10.0 ** (shadow_db / 10.0)
    g = rng.standard_normal((top.num_users, top.num_bs, N, M)) \
        + 1j * rng.standard_normal((top.num_users, top.num_bs, N, M))
    channels = np.sqrt(var)[:, :, None, None] * g / np.sqrt(2.0)

    budgets = np.full(top.num_bs, db_to_linear(params.other_bs_budget_db))
    for k in range(K):
        budgets[top.bs_offset(k)] = db_to_linear(params.center_bs_budget_db)
    targets = np.full(top.num_users, db_to_linear(params.sinr_target_db))
    noise = np.full(top.num_users, params.noise_power)
    return NetworkInstance(topology=top, channels=channels, noise_power=noise,
                           power_budget=budgets, sinr_target=targets)


def _signal_and_interference(net: NetworkInstance, v: BeamformerSet, user: int):
    """Received signal vector and interference-plus-noise covariance at `user`."""
    top = net.topology
    N = top.rx_antennas
    k = int(top.user_cell[user])
    i_local = user - top.user_offset(k)
    J = net.noise_power[user] * np.eye(N, dtype=complex)
    signal = None
    for l in range(top.num_cells):
        H = net.cell_channel(l)[user]                         # (N, M*Q_l)
        recv = H @ v.cells[l].T                               # (N, I_l)
        for j in range(top.users_per_cell[l]):
            if l == k and j == i_local:
                signal = recv[:, j]
            else:
                J += np.outer(recv[:, j], recv[:, j].conj())
    return signal, J


def sinr(net: NetworkInstance, v: BeamformerSet, user: int) -> float:
    """SINR at a user for N == 1 (scalar receive) networks."""
    if net.topology.rx_antennas != 1:
        raise DimensionError("sinr() is defined for N == 1; use rate() otherwise")
    s, J = _signal_and_interference(net, v, user)
    return float(np.abs(s[0]) ** 2 / J[0, 0].real)


def rate(net: NetworkInstance, v: BeamformerSet, user: int) -> float:
    """Achievable rate (nats) with single-stream transmission and
    interference treated as noise."""
    if np.any(net.noise_power <= 0):
        raise ConfigError("noise power must be positive")
    s, J = _signal_and_interference(net, v, user)
    q = np.real(s.conj() @ np.linalg.solve(J, s))
    return float(np.log1p(max(q, 0.0)))


def sum_rate(net: NetworkInstance, v: BeamformerSet) -> float:
    return float(sum(rate(net, v, i) for i in range(net.num_users)))


def mse(net: NetworkInstance, v: BeamformerSet, u: np.ndarray, user: int) -> float:
    """Estimation MSE at `user` with receive filter `u` (length N)."""
    top = net.topology
    if u.shape != (top.rx_antennas,):
        raise DimensionError("receive filter must have length N")
    k = int(top.user_cell[user])
    i_local = user - top.user_offset(k)
    e = 0.0
    for l in range(top.num_cells):
        H = net.cell_channel(l)[user]
        recv = H @ v.cells[l].T
        for j in range(top.users_per_cell[l]):
            t = u.conj() @ recv[:, j]
            if l == k and j == i_local:
                e += np.abs(1.0 - t) ** 2
            else:
                e += np.abs(t) ** 2
    e += net.noise_power[user] * float(np.real(u.conj() @ u))
    return float(e)


# --- serialization ----------------------------------------------------------

def _complex_to_pairs(arr: np.ndarray):
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def _pairs_to_complex(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def instance_to_json(net: NetworkInstance) -> str:
    """Self-describing, full-precision text form of a NetworkInstance."""
    top = net.topology
    doc = {
        "format": "sparsecell/network-instance",
        "version": 1,
        "topology": {
            "num_cells": top.num_cells,
            "bs_per_cell": list(top.bs_per_cell),
            "users_per_cell": list(top.users_per_cell),
            "tx_antennas": top.tx_antennas,
            "rx_antennas": top.rx_antennas,
            "cell_centers": top.cell_centers.tolist(),
            "bs_positions": top.bs_positions.tolist(),
            "user_positions": top.user_positions.tolist(),
        },
        "channels_re_im": _complex_to_pairs(net.channels),
        "noise_power": net.noise_power.tolist(),
        "power_budget": net.power_budget.tolist(),
        "sinr_target": None if net.sinr_target is None else net.sinr_target.tolist(),
    }
    return json.dumps(doc)


def instance_from_json(text: str) -> NetworkInstance:
    doc = json.loads(text)
    if doc.get("format") != "sparsecell/network-instance":
        raise ConfigError("not a network-instance document")
    t = doc["topology"]
    top = NetworkTopology(
        num_cells=t["num_cells"],
        bs_per_cell=tuple(t["bs_per_cell"]),
        users_per_cell=tuple(t["users_per_cell"]),
        tx_antennas=t["tx_antennas"],
        rx_antennas=t["rx_antennas"],
        cell_centers=np.asarray(t["cell_centers"], dtype=float),
        bs_positions=np.asarray(t["bs_positions"], dtype=float),
        user_positions=np.asarray(t["user_positions"], dtype=float),
    )
    tgt = doc["sinr_target"]
    return NetworkInstance(
        topology=top,
        channels=_pairs_to_complex(doc["channels_re_im"]),
        noise_power=np.asarray(doc["noise_power"], dtype=float),
        power_budget=np.asarray(doc["power_budget"], dtype=float),
        sinr_target=None if tgt is None else np.asarray(tgt, dtype=float),
    )


def restrict_to_bs(net: NetworkInstance, active: set[int] | tuple[int, ...]):
    """Sub-network keeping only the given global BS indices.

    Users and cells are preserved.  Raises InfeasibleError if a cell with
    users and positive SINR targets would lose all its BSs.  Returns the
    reduced instance plus, per cell, the kept in-cell BS indices (for
    embedding solutions back into the full network).
    """
    from .errors import InfeasibleError

    top = net.topology
    active = set(int(q) for q in active)
    keep_per_cell: list[list[int]] = []
    for k in range(top.num_cells):
        keep = [q for q in range(top.bs_per_cell[k]) if top.bs_offset(k) + q in active]
        if not keep and top.users_per_cell[k] > 0 and net.sinr_target is not None:
            raise InfeasibleError(f"cell {k} has users but no active BS")
        if not keep:
            raise InfeasibleError(f"cell {k} would have no BS")
        keep_per_cell.append(keep)

    keep_global = [top.bs_offset(k) + q for k in range(top.num_cells) for q in keep_per_cell[k]]
    new_top = NetworkTopology(
        num_cells=top.num_cells,
        bs_per_cell=tuple(len(keep) for keep in keep_per_cell),
        users_per_cell=top.users_per_cell,
        tx_antennas=top.tx_antennas,
        rx_antennas=top.rx_antennas,
        cell_centers=top.cell_centers.copy(),
        bs_positions=top.bs_positions[keep_global].copy(),
        user_positions=top.user_positions.copy(),
    )
    reduced = NetworkInstance(
        topology=new_top,
        channels=net.channels[:, keep_global].copy(),
        noise_power=net.noise_power.copy(),
        power_budget=net.power_budget[keep_global].copy(),
        sinr_target=None if net.sinr_target is None else net.sinr_target.copy(),
    )
    return reduced, keep_per_cell


def embed_beamformers(full_top: NetworkTopology, v_reduced: BeamformerSet,
                      keep_per_cell: list[list[int]]) -> BeamformerSet:
    """Zero-pad a reduced-network solution back to the full BS layout."""
    out = BeamformerSet.zeros(full_top)
    m = full_top.tx_antennas
    for k in range(full_top.num_cells):
        for idx, q in enumerate(keep_per_cell[k]):
            out.cells[k][:, q * m:(q + 1) * m] = v_reduced.cells[k][:, idx * m:(idx + 1) * m]
    return out
