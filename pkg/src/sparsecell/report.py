"""Solver result container shared by both solvers, with text serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .network import BeamformerSet

CONVERGED = "converged"
INFEASIBLE = "infeasible"
MAX_ITERS = "max_iters"


@dataclass
class SolveReport:
    solver: str
    status: str
    iterations: int
    total_power: float
    active_bs: tuple[int, ...]
    termination_reason: str
    history: dict = field(default_factory=dict)
    beamformers: BeamformerSet | None = None
    # sum-rate solver extras
    sum_rate: float | None = None
    alpha: list | None = None                 # per-cell activation scalars
    per_user_rates: list | None = None
    cluster_sizes: list | None = None         # per-user count of serving BSs
    diagnostics: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    def to_json(self) -> str:
        hist = {k: [v if isinstance(v, str) else float(v) for v in vals]
                for k, vals in self.history.items()}
        doc = {
            "format": "sparsecell/solve-report",
            "version": 1,
            "solver": self.solver,
            "status": self.status,
            "iterations": self.iterations,
            "total_power": self.total_power,
            "active_bs": list(self.active_bs),
            "termination_reason": self.termination_reason,
            "history": hist,
        }
        if self.sum_rate is not None:
            doc["sum_rate"] = self.sum_rate
        if self.alpha is not None:
            doc["alpha"] = [np.asarray(a, dtype=float).tolist() for a in self.alpha]
        if self.per_user_rates is not None:
            doc["per_user_rates"] = [float(r) for r in self.per_user_rates]
        if self.cluster_sizes is not None:
            doc["cluster_sizes"] = [int(c) for c in self.cluster_sizes]
        if self.diagnostics:
            plain = {k: v for k, v in self.diagnostics.items()
                     if isinstance(v, (bool, int, float, str, list, dict, type(None)))}
            if plain:
                doc["diagnostics"] = plain
        return json.dumps(doc)


def report_from_json(text: str) -> SolveReport:
    doc = json.loads(text)
    if doc.get("format") != "sparsecell/solve-report":
        raise ValueError("not a solve-report document")
    return SolveReport(
        solver=doc["solver"],
        status=doc["status"],
        iterations=doc["iterations"],
        total_power=doc["total_power"],
        active_bs=tuple(doc["active_bs"]),
        termination_reason=doc["termination_reason"],
        history=doc.get("history", {}),
        sum_rate=doc.get("sum_rate"),
        alpha=doc.get("alpha"),
        per_user_rates=doc.get("per_user_rates"),
        cluster_sizes=doc.get("cluster_sizes"),
        diagnostics=doc.get("diagnostics", {}),
    )
