"""Command-line experiment runner.

Exit codes: 0 on full success, 2 if any main-solver realization was
infeasible, 1 on error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .admm import AdmmConfig
from .errors import SparseCellError
from .experiments import (BASELINES, MODES, ExperimentSpec, preset,
                          run_experiment)
from .network import NetworkParams
from .report import INFEASIBLE
from .swmmse import SwmmseConfig


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sparsecell",
        description="Joint BS activation and beamforming experiments "
                    "(power minimization via operator splitting, sum-rate "
                    "maximization via sparse weighted-MMSE).")
    p.add_argument("--config", help="JSON file of defaults; flags override it")
    p.add_argument("--preset", choices=["powermin-paper", "sumrate-paper"],
                   help="start from a named parameter set")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--cells", type=int, help="number of cells")
    p.add_argument("--bs-per-cell", type=int, help="BSs per cell incl. the center BS")
    p.add_argument("--users", type=int, help="users per cell")
    p.add_argument("--antennas-tx", type=int, help="transmit antennas per BS")
    p.add_argument("--antennas-rx", type=int, help="receive antennas per user")
    p.add_argument("--snr-db", type=float, help="1/noise-power in dB (noise = 10^(-snr/10))")
    p.add_argument("--tau-db", type=float, help="per-user SINR target in dB")
    p.add_argument("--center-budget-db", type=float, help="center-BS power budget in dB")
    p.add_argument("--other-budget-db", type=float, help="non-center BS budget in dB")
    p.add_argument("--rho", type=float, help="splitting penalty parameter")
    p.add_argument("--tol", type=float, help="solver stopping tolerance")
    p.add_argument("--max-iters", type=int, help="solver iteration limit")
    p.add_argument("--infeasible-cap", type=int,
                   help="iterations before a run is declared infeasible")
    p.add_argument("--beta0", type=float, help="initial group weight (selection mode)")
    p.add_argument("--mu", type=float, help="per-BS activation penalty (sum-rate modes)")
    p.add_argument("--lambda", dest="lam", type=float,
                   help="per-cell cluster penalty (sumrate-clustered)")
    p.add_argument("--seed", type=int)
    p.add_argument("--realizations", type=int)
    p.add_argument("--reweight-rounds", type=int)
    p.add_argument("--baseline", action="append", choices=list(BASELINES), default=None,
                   help="repeatable; adds comparison rows")
    p.add_argument("--out", help="CSV output path (summary JSON written alongside)")
    p.add_argument("--no-timing", action="store_true",
                   help="record runtime_ms as 0 so reruns are byte-identical")
    return p


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    spec = preset(args.preset) if args.preset else ExperimentSpec()

    settings: dict = {}
    if args.config:
        with open(args.config) as fh:
            settings.update(json.load(fh))
    cli_keys = ("mode", "cells", "bs_per_cell", "users", "antennas_tx", "antennas_rx",
                "snr_db", "tau_db", "center_budget_db", "other_budget_db", "rho",
                "tol", "max_iters", "infeasible_cap", "beta0", "mu", "lam", "seed",
                "realizations", "reweight_rounds", "baseline", "out", "no_timing")
    for key in cli_keys:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            settings[key] = val

    net = spec.network
    net_kw = {}
    for src, dst in (("cells", "num_cells"), ("bs_per_cell", "bs_per_cell"),
                     ("users", "users_per_cell"), ("antennas_tx", "tx_antennas"),
                     ("antennas_rx", "rx_antennas"), ("tau_db", "sinr_target_db"),
                     ("center_budget_db", "center_bs_budget_db"),
                     ("other_budget_db", "other_bs_budget_db")):
        if src in settings:
            net_kw[dst] = settings[src]
    if "snr_db" in settings:
        net_kw["noise_power"] = 10.0 ** (-float(settings["snr_db"]) / 10.0)
    if net_kw:
        from dataclasses import replace
        net = replace(net, **net_kw)

    admm_kw = {}
    for src, dst in (("rho", "rho"), ("tol", "eps_tol"), ("max_iters", "max_iters"),
                     ("infeasible_cap", "infeasible_iter_cap"),
                     ("reweight_rounds", "reweight_rounds")):
        if src in settings:
            admm_kw[dst] = settings[src]
    sw_kw = {}
    if "mu" in settings:
        sw_kw["mu"] = settings["mu"]
    if "lam" in settings:
        sw_kw["cluster_penalty"] = settings["lam"]
    if "tol" in settings:
        sw_kw["obj_tol"] = settings["tol"]
    if "max_iters" in settings:
        sw_kw["max_outer_iters"] = settings["max_iters"]
    if "reweight_rounds" in settings:
        sw_kw["reweight_rounds"] = settings["reweight_rounds"]

    from dataclasses import replace
    spec = replace(
        spec,
        mode=settings.get("mode", spec.mode),
        network=net,
        admm=replace(spec.admm, **admm_kw),
        swmmse=replace(spec.swmmse, **sw_kw),
        beta0=settings.get("beta0", spec.beta0),
        realizations=settings.get("realizations", spec.realizations),
        seed=settings.get("seed", spec.seed),
        baselines=tuple(settings.get("baseline", spec.baselines) or ()),
        out=settings.get("out", spec.out),
        measure_runtime=not settings.get("no_timing", not spec.measure_runtime),
    )
    return spec


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
        result = run_experiment(spec)
    except SparseCellError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    summary = result["summary"]
    for mode, entry in sorted(summary.items()):
        bits = [f"{mode}: n={entry['realizations']}", f"infeasible={entry['infeasible']}"]
        for key in ("active_bs_mean", "total_power_w_mean", "sum_rate_nats_mean"):
            if key in entry:
                bits.append(f"{key.rsplit('_', 1)[0]}={entry[key]:.4g}")
        print("  ".join(bits))
    if spec.out:
        print(f"wrote {spec.out} and {spec.out}.summary.json")
    main_rows = [r for r in result["rows"] if r.mode == spec.mode]
    if any(r.status == INFEASIBLE for r in main_rows):
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
