"""Paracontracting multi-agent coordination optimization.

The package has two halves:

* an optimizer (:mod:`pmco.optimizer`) running a swarm of agents that
  share information over switching directed graphs, and
* a verification toolkit (:mod:`pmco.switched`, :mod:`pmco.eigenspaces`,
  :mod:`pmco.semistability`, :mod:`pmco.verify`) that builds the
  switched-system matrices of the swarm and checks the closed-form rank,
  kernel, spectrum and convergence statements against numerical oracles.
"""

from .graphs import Digraph, GdsSchedule, gds_topology, laplacian, random_digraph
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    null_space,
    numerical_rank,
    pinv,
    subspace_equal,
)
from .objectives import OBJECTIVES, get_objective
from .optimizer import (
    ConfigError,
    InfeasibleOmegaError,
    NumericAbort,
    OmegaSpec,
    PMatrixSpec,
    RunConfig,
    RunResult,
    convergence_metrics,
    run,
)
from .semistability import (
    MatrixPool,
    is_discrete_time_semistable,
    is_paracontracting_lemma1,
    paracontraction_definition_check,
    product_iteration,
)
from .switched import (
    McoCoefficients,
    SwitchedSystemMatrices,
    check_theorem_conditions,
    predicted_rank_A,
)
from .verify import SweepConfig, run_sweep, summarize

__version__ = "0.1.0"

__all__ = [
    "Digraph", "GdsSchedule", "gds_topology", "laplacian", "random_digraph",
    "DEFAULT_TOL", "Subspace", "ToleranceConfig", "null_space", "numerical_rank", "pinv", "subspace_equal",
    "OBJECTIVES", "get_objective",
    "ConfigError", "InfeasibleOmegaError", "NumericAbort", "OmegaSpec", "PMatrixSpec",
    "RunConfig", "RunResult", "convergence_metrics", "run",
    "MatrixPool", "is_discrete_time_semistable", "is_paracontracting_lemma1",
    "paracontraction_definition_check", "product_iteration",
    "McoCoefficients", "SwitchedSystemMatrices", "check_theorem_conditions", "predicted_rank_A",
    "SweepConfig", "run_sweep", "summarize",
]
