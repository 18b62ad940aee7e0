"""Joint base-station activation and linear transceiver design for
multi-cell heterogeneous networks.

Two solver families over a shared network model:

* ``admm``: power minimization under SINR targets with group-sparse BS
  activation (operator splitting with closed-form blocks), plus iterative
  reweighting and penalty-free debiasing.
* ``swmmse``: regularized sum-rate maximization via weighted-MMSE block
  coordinate descent with per-BS activation scalars and optional serving
  cluster shrinkage.

``oracle`` holds independent ground-truth solvers for small instances;
``experiments``/``cli`` run seeded Monte-Carlo sweeps with CSV output.
"""

from .admm import (AdmmConfig, AdmmState, admm_solve, debias, reweight,
                   solve_with_reweighting)
from .errors import (ConfigError, DimensionError, InfeasibleError, OracleError,
                     SparseCellError)
from .network import (BeamformerSet, NetworkInstance, NetworkParams,
                      NetworkTopology, active_bs_set, generate_network,
                      instance_from_json, instance_to_json, mse, rate, sinr,
                      sum_rate, total_power)
from .oracle import (Graph, PowerControlInstance, feasible_with_set,
                     min_active_set, min_vertex_cover, miso_power_oracle,
                     vertex_cover_instance)
from .report import SolveReport, report_from_json
from .swmmse import (SwmmseConfig, SwmmseState, debias_swmmse, reweight_mu,
                     solve_sumrate, swmmse_solve, wmmse_baseline)

__all__ = [
    "AdmmConfig", "AdmmState", "BeamformerSet", "ConfigError", "DimensionError",
    "Graph", "InfeasibleError", "NetworkInstance", "NetworkParams",
    "NetworkTopology", "OracleError", "PowerControlInstance", "SolveReport",
    "SparseCellError", "SwmmseConfig", "SwmmseState", "active_bs_set",
    "admm_solve", "debias", "debias_swmmse", "feasible_with_set",
    "generate_network", "instance_from_json", "instance_to_json",
    "min_active_set", "min_vertex_cover", "miso_power_oracle", "mse", "rate",
    "report_from_json", "reweight", "reweight_mu", "sinr", "solve_sumrate",
    "solve_with_reweighting", "sum_rate", "swmmse_solve", "total_power",
    "vertex_cover_instance", "wmmse_baseline",
]

__version__ = "0.1.0"
