"""Seeded Monte-Carlo experiment runner with CSV / JSON emission.

Each realization draws a fresh network (seed + index), runs the solver for
the requested mode plus any baselines, and contributes one CSV row per
(variant, realization).  Means and standard deviations go to a summary
JSON next to the CSV; infeasible realizations are counted but excluded
from the averages.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .admm import AdmmConfig, admm_solve, debias, solve_with_reweighting
from .errors import ConfigError, InfeasibleError
from .network import NetworkInstance, NetworkParams, generate_network
from .report import INFEASIBLE, SolveReport
from .swmmse import SwmmseConfig, solve_sumrate, wmmse_baseline

MODES = ("power-min", "selection", "sumrate", "sumrate-clustered")
BASELINES = ("all-on", "random-50", "random-70")

CSV_COLUMNS = ("mode", "cells", "seed", "realization", "status", "iters",
               "active_bs", "total_power_w", "sum_rate_nats", "runtime_ms")


@dataclass
class ExperimentSpec:
    mode: str = "power-min"
    network: NetworkParams = field(default_factory=NetworkParams)
    admm: AdmmConfig = field(default_factory=AdmmConfig)
    swmmse: SwmmseConfig = field(default_factory=SwmmseConfig)
    beta0: float = 1.0               # initial group weight for selection mode
    realizations: int = 1
    seed: int = 0
    baselines: tuple[str, ...] = ()
    out: str | None = None
    measure_runtime: bool = True     # disable for byte-identical reruns

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.realizations < 1:
            raise ConfigError("realization count must be >= 1")
        for b in self.baselines:
            if b not in BASELINES:
                raise ConfigError(f"unknown baseline {b!r}; choose from {BASELINES}")
        if self.mode in ("power-min", "selection") and self.network.rx_antennas != 1:
            raise ConfigError("power modes require single-antenna receivers")
        self.network.validate()


@dataclass
class RunRow:
    mode: str
    cells: int
    seed: int
    realization: int
    status: str
    iters: int
    active_bs: int
    total_power_w: float
    sum_rate_nats: float
    runtime_ms: float

    def as_list(self):
        return [self.mode, self.cells, self.seed, self.realization, self.status,
                self.iters, self.active_bs,
                repr(float(self.total_power_w)), repr(float(self.sum_rate_nats)),
                repr(float(self.runtime_ms))]


def _random_subset(net: NetworkInstance, fraction: float, rng: np.random.Generator) -> set[int]:
    """Per cell: the center BS plus a random draw filling `fraction` of the cell."""
    chosen: set[int] = set()
    top = net.topology
    for k in range(top.num_cells):
        q = top.bs_per_cell[k]
        n_on = max(1, int(round(fraction * q)))
        others = np.array([top.bs_offset(k) + j for j in range(1, q)])
        chosen.add(top.bs_offset(k))
        if n_on > 1 and len(others):
            picked = rng.choice(others, size=min(n_on - 1, len(others)), replace=False)
            chosen.update(int(x) for x in picked)
    return chosen


def _run_variant(spec: ExperimentSpec, net: NetworkInstance, label: str,
                 subset: set[int] | None) -> tuple[SolveReport | None, str, float, float]:
    """Run one solver variant; returns (report, status, power, sum_rate)."""
    mode = spec.mode
    if mode == "power-min" or (mode == "selection" and label != "main"):
        cfg = replace(spec.admm, beta=0.0, theta=1.0)
        try:
            rep = admm_solve(net, cfg) if subset is None else debias(net, cfg, subset)
        except InfeasibleError:
            return None, INFEASIBLE, float("nan"), float("nan")
        power = rep.total_power if rep.status != INFEASIBLE else float("nan")
        return rep, rep.status, power, float("nan")

    if mode == "selection":
        rounds = solve_with_reweighting(net, spec.admm, beta0=spec.beta0)
        last = rounds[-1]
        if last.status == INFEASIBLE:
            return last, INFEASIBLE, float("nan"), float("nan")
        try:
            deb = debias(net, spec.admm, last.active_bs)
        except InfeasibleError:
            return last, INFEASIBLE, float("nan"), float("nan")
        deb.diagnostics["reweight_active_counts"] = [len(r.active_bs) for r in rounds]
        return deb, deb.status, deb.total_power, float("nan")

    # sum-rate modes
    cfg = spec.swmmse
    if mode == "sumrate":
        cfg = replace(cfg, cluster_penalty=0.0)
    if label != "main":
        rep = wmmse_baseline(net, cfg, active=subset)
        return rep, rep.status, rep.total_power, rep.sum_rate
    rep, _rounds = solve_sumrate(net, cfg)
    return rep, rep.status, rep.total_power, rep.sum_rate


def run_experiment(spec: ExperimentSpec) -> dict:
    """Execute all realizations; returns {'rows': [...], 'summary': {...}}.

    Results accumulated so far are still returned (and written, if an output
    path is set) when interrupted.
    """
    spec.validate()
    rows: list[RunRow] = []
    try:
        for r in range(spec.realizations):
            net = generate_network(spec.network, spec.seed + r)
            variants: list[tuple[str, set[int] | None]] = [("main", None)]
            for b in spec.baselines:
                if b == "all-on":
                    variants.append((b, set(range(net.num_bs))))
                else:
                    frac = 0.5 if b == "random-50" else 0.7
                    rng = np.random.default_rng([spec.seed, r, BASELINES.index(b)])
                    variants.append((b, _random_subset(net, frac, rng)))
            for label, subset in variants:
                t0 = time.perf_counter()
                rep, status, power, srate = _run_variant(spec, net, label, subset)
                dt_ms = (time.perf_counter() - t0) * 1000.0 if spec.measure_runtime else 0.0
                rows.append(RunRow(
                    mode=spec.mode if label == "main" else f"{spec.mode}:{label}",
                    cells=spec.network.num_cells,
                    seed=spec.seed,
                    realization=r,
                    status=status,
                    iters=0 if rep is None else rep.iterations,
                    active_bs=0 if rep is None else len(rep.active_bs),
                    total_power_w=power,
                    sum_rate_nats=srate,
                    runtime_ms=dt_ms,
                ))
    finally:
        result = {"rows": rows, "summary": summarize(rows)}
        if spec.out:
            emit_csv(rows, spec.out)
            with open(spec.out + ".summary.json", "w") as fh:
                json.dump(result["summary"], fh, indent=1, sort_keys=True)
    return result


def summarize(rows: list[RunRow]) -> dict:
    """Per-variant mean/std over converged realizations; infeasible counted."""
    out: dict = {}
    by_mode: dict[str, list[RunRow]] = {}
    for row in rows:
        by_mode.setdefault(row.mode, []).append(row)
    for mode, group in by_mode.items():
        ok = [g for g in group if g.status != INFEASIBLE]
        entry = {
            "realizations": len(group),
            "infeasible": len(group) - len(ok),
        }
        for name, vals in (("total_power_w", [g.total_power_w for g in ok]),
                           ("sum_rate_nats", [g.sum_rate_nats for g in ok]),
                           ("active_bs", [float(g.active_bs) for g in ok])):
            finite = [v for v in vals if np.isfinite(v)]
            if finite:
                entry[name + "_mean"] = float(np.mean(finite))
                entry[name + "_std"] = float(np.std(finite))
        out[mode] = entry
    return out


def emit_csv(rows: list[RunRow], path: str) -> None:
    """Stable-order CSV; header always present, even with no rows."""
    with open(path, "w", newline="") as fh:
        _write_csv(rows, fh)


def csv_text(rows: list[RunRow]) -> str:
    buf = io.StringIO()
    _write_csv(rows, buf)
    return buf.getvalue()


def _write_csv(rows: list[RunRow], fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.as_list())


def parse_csv(text: str) -> list[RunRow]:
    """Inverse of emit_csv (floats round-trip exactly via repr)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ConfigError("unexpected CSV header")
    rows = []
    for rec in reader:
        rows.append(RunRow(
            mode=rec[0], cells=int(rec[1]), seed=int(rec[2]), realization=int(rec[3]),
            status=rec[4], iters=int(rec[5]), active_bs=int(rec[6]),
            total_power_w=float(rec[7]), sum_rate_nats=float(rec[8]),
            runtime_ms=float(rec[9])))
    return rows


def preset(name: str) -> ExperimentSpec:
    """Named parameter sets reproducing the reference experiment scales."""
    if name == "powermin-paper":
        return ExperimentSpec(
            mode="selection",
            network=NetworkParams(num_cells=4, bs_per_cell=20, users_per_cell=10,
                                  tx_antennas=5, rx_antennas=1,
                                  sinr_target_db=15.0, center_bs_budget_db=10.0,
                                  other_bs_budget_db=5.0, noise_power=0.1),
            admm=AdmmConfig(rho=5.0, eps_tol=1e-4, max_iters=2000,
                            infeasible_iter_cap=2000, reweight_rounds=6),
            realizations=100,
        )
    if name == "sumrate-paper":
        p_tot = 10.0 ** (10.0 / 10.0)      # 10 dB total per cell
        q = 10
        center_db = 10.0 * np.log10(p_tot / 2.0)
        other_db = 10.0 * np.log10(p_tot / 2.0 / (q - 1))
        return ExperimentSpec(
            mode="sumrate",
            network=NetworkParams(num_cells=4, bs_per_cell=q, users_per_cell=10,
                                  tx_antennas=4, rx_antennas=2,
                                  sinr_target_db=0.0,
                                  center_bs_budget_db=float(center_db),
                                  other_bs_budget_db=float(other_db),
                                  noise_power=1.0),
            swmmse=SwmmseConfig(mu=1.5, cluster_penalty=0.0),
            realizations=100,
        )
    raise ConfigError(f"unknown preset {name!r}")
