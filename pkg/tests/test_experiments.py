"""Experiment runner and CLI: CSV contract, determinism, baselines, exit codes."""

import json
import subprocess
import sys

import numpy as np
import pytest

import sparsecell as sc
from sparsecell.admm import AdmmConfig
from sparsecell.cli import main as cli_main
from sparsecell.experiments import (CSV_COLUMNS, ExperimentSpec, RunRow,
                                    csv_text, emit_csv, parse_csv, preset,
                                    run_experiment)
from sparsecell.network import NetworkParams
from sparsecell.swmmse import SwmmseConfig


def small_powermin_spec(**kw):
    base = dict(
        mode="power-min",
        network=NetworkParams(num_cells=1, bs_per_cell=2, users_per_cell=1,
                              tx_antennas=2, sinr_target_db=3.0,
                              noise_power=0.1),
        admm=AdmmConfig(eps_tol=1e-5, max_iters=4000, infeasible_iter_cap=4000),
        realizations=1, seed=5, measure_runtime=False)
    base.update(kw)
    return ExperimentSpec(**base)


class TestCsv:
    def test_header_always_present(self):
        assert csv_text([]).splitlines() == [",".join(CSV_COLUMNS)]

    def test_one_row_two_lines(self):
        row = RunRow("power-min", 1, 0, 0, "converged", 10, 2, 1.5, float("nan"), 3.25)
        text = csv_text([row])
        assert len(text.splitlines()) == 2

    def test_round_trip_exact(self):
        rows = [RunRow("power-min", 1, 0, 0, "converged", 10, 2,
                       0.1234567890123456789, float("nan"), 3.25),
                RunRow("power-min:all-on", 1, 0, 1, "infeasible", 99, 0,
                       float("nan"), 2.0 / 3.0, 0.0)]
        back = parse_csv(csv_text(rows))
        for a, b in zip(rows, back):
            assert a.mode == b.mode and a.status == b.status
            assert a.iters == b.iters and a.active_bs == b.active_bs
            assert (a.total_power_w == b.total_power_w
                    or (np.isnan(a.total_power_w) and np.isnan(b.total_power_w)))
            assert (a.sum_rate_nats == b.sum_rate_nats
                    or (np.isnan(a.sum_rate_nats) and np.isnan(b.sum_rate_nats)))
            assert a.runtime_ms == b.runtime_ms

    def test_rejects_foreign_header(self):
        with pytest.raises(sc.ConfigError):
            parse_csv("a,b,c\n1,2,3\n")

    def test_emit_empty(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_csv([], str(path))
        assert path.read_text().strip() == ",".join(CSV_COLUMNS)


class TestRunExperiment:
    def test_single_realization_matches_oracle(self):
        spec = small_powermin_spec()
        res = run_experiment(spec)
        rows = res["rows"]
        assert len(rows) == 1
        assert rows[0].status == "converged"
        net = sc.generate_network(spec.network, spec.seed)
        oracle = sc.miso_power_oracle(net)
        assert oracle.status == "optimal"
        assert rows[0].total_power_w == pytest.approx(oracle.total_power, rel=1e-3)

    def test_deterministic_byte_identical(self, tmp_path):
        out1, out2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        spec1 = small_powermin_spec(realizations=2, out=out1,
                                    baselines=("all-on", "random-50"))
        spec2 = small_powermin_spec(realizations=2, out=out2,
                                    baselines=("all-on", "random-50"))
        run_experiment(spec1)
        run_experiment(spec2)
        assert open(out1, "rb").read() == open(out2, "rb").read()
        assert (open(out1 + ".summary.json", "rb").read()
                == open(out2 + ".summary.json", "rb").read())

    def test_all_on_baseline_is_power_lower_bound(self):
        spec = small_powermin_spec(
            mode="selection", realizations=3, seed=21, beta0=1.0,
            network=NetworkParams(num_cells=1, bs_per_cell=3, users_per_cell=2,
                                  tx_antennas=2, sinr_target_db=3.0,
                                  noise_power=0.1),
            admm=AdmmConfig(eps_tol=1e-5, max_iters=6000,
                            infeasible_iter_cap=6000, reweight_rounds=3),
            baselines=("all-on",))
        res = run_experiment(spec)
        by_real = {}
        for row in res["rows"]:
            by_real.setdefault(row.realization, {})[row.mode] = row
        for r, group in by_real.items():
            main_row = group["selection"]
            base = group["selection:all-on"]
            if main_row.status == "converged" and base.status == "converged":
                assert base.total_power_w <= main_row.total_power_w * (1 + 1e-6)

    def test_random_baseline_counts(self):
        # 50% of 4 BSs per cell with the center always on -> 2 per cell
        spec = ExperimentSpec(
            mode="sumrate",
            network=NetworkParams(num_cells=2, bs_per_cell=4, users_per_cell=2,
                                  tx_antennas=2, rx_antennas=2,
                                  center_bs_budget_db=3.0, other_bs_budget_db=0.0,
                                  noise_power=1.0),
            swmmse=SwmmseConfig(mu=0.3, obj_tol=1e-4, max_outer_iters=40,
                                reweight_rounds=2),
            realizations=1, seed=9, baselines=("random-50",),
            measure_runtime=False)
        res = run_experiment(spec)
        base_rows = [r for r in res["rows"] if r.mode.endswith("random-50")]
        assert len(base_rows) == 1
        assert base_rows[0].active_bs == 4      # 2 cells x 2 BSs

    def test_infeasible_counted_and_excluded(self):
        # an unreachable target: selection-free power-min on a tiny budget
        spec = small_powermin_spec(
            network=NetworkParams(num_cells=1, bs_per_cell=2, users_per_cell=1,
                                  tx_antennas=2, sinr_target_db=60.0,
                                  center_bs_budget_db=-20.0,
                                  other_bs_budget_db=-20.0, noise_power=1.0),
            admm=AdmmConfig(eps_tol=1e-5, max_iters=300, infeasible_iter_cap=300))
        res = run_experiment(spec)
        assert res["rows"][0].status == "infeasible"
        summary = res["summary"]["power-min"]
        assert summary["infeasible"] == 1
        assert "total_power_w_mean" not in summary

    def test_validation(self):
        with pytest.raises(sc.ConfigError):
            run_experiment(small_powermin_spec(mode="nonsense"))
        with pytest.raises(sc.ConfigError):
            run_experiment(small_powermin_spec(realizations=0))
        with pytest.raises(sc.ConfigError):
            run_experiment(small_powermin_spec(baselines=("bogus",)))

    def test_presets_exist(self):
        p1 = preset("powermin-paper")
        assert p1.network.bs_per_cell == 20 and p1.network.tx_antennas == 5
        assert p1.admm.rho == 5.0 and p1.admm.eps_tol == 1e-4
        p2 = preset("sumrate-paper")
        assert p2.network.bs_per_cell == 10 and p2.network.rx_antennas == 2
        # center budget is half the per-cell total
        center = 10 ** (p2.network.center_bs_budget_db / 10)
        other = 10 ** (p2.network.other_bs_budget_db / 10)
        total = center + 9 * other
        assert center == pytest.approx(total / 2, rel=1e-9)


class TestCli:
    def test_exit_zero_and_output(self, tmp_path, capsys):
        out = str(tmp_path / "run.csv")
        code = cli_main(["--mode", "power-min", "--cells", "1", "--bs-per-cell", "2",
                         "--users", "1", "--antennas-tx", "2", "--tau-db", "3",
                         "--snr-db", "10", "--seed", "5", "--realizations", "1",
                         "--out", out, "--no-timing"])
        assert code == 0
        lines = open(out).read().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 2
        assert json.load(open(out + ".summary.json"))["power-min"]["infeasible"] == 0

    def test_exit_two_on_infeasible(self, tmp_path):
        code = cli_main(["--mode", "power-min", "--cells", "1", "--bs-per-cell", "2",
                         "--users", "1", "--antennas-tx", "2", "--tau-db", "60",
                         "--snr-db", "-10", "--center-budget-db", "-20",
                         "--other-budget-db", "-20", "--seed", "5",
                         "--realizations", "1", "--max-iters", "300",
                         "--infeasible-cap", "300",
                         "--out", str(tmp_path / "x.csv")])
        assert code == 2

    def test_exit_one_on_error(self, tmp_path, capsys):
        code = cli_main(["--mode", "power-min", "--cells", "0",
                         "--out", str(tmp_path / "x.csv")])
        assert code == 1

    def test_config_file_and_flag_override(self, tmp_path):
        cfg = {"mode": "power-min", "cells": 1, "bs_per_cell": 2, "users": 1,
               "antennas_tx": 2, "tau_db": 3.0, "snr_db": 10.0, "seed": 5,
               "realizations": 1, "no_timing": True}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out1 = str(tmp_path / "a.csv")
        out2 = str(tmp_path / "b.csv")
        assert cli_main(["--config", str(cfg_path), "--out", out1]) == 0
        # flag overrides the config file seed
        assert cli_main(["--config", str(cfg_path), "--seed", "6",
                         "--out", out2]) == 0
        assert open(out1).read() != open(out2).read()

    def test_console_script_installed(self):
        proc = subprocess.run([sys.executable, "-m", "sparsecell.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "--mode" in proc.stdout
