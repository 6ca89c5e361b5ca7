"""Mixed exponential random graph models with nodal random effects."""

from .driver import FitResult, fit_ergm, fit_mergm
from .errors import (
    BoundaryMleError,
    ConfigError,
    DegeneracyError,
    EdgeListParseError,
    EnumerationLimitError,
    InvalidNodeError,
    MergmError,
    ModelSpecError,
)
from .glmm import NodeEffects, build_dyad_design, fit_pql
from .gof import GofReport, gof_run
from .graph import UndirectedNetwork, complete_network, empty_network
from .mcmcmle import McmleConfig, McmleResult, fit_theta, mple
from .sampler import SampleBatch, SamplerConfig, sample, sample_chains
from .selection import (
    AicReport,
    aic_ergm,
    aic_mergm,
    compare_aic,
    estimate_log_kappa,
    estimate_var_t,
    fisher_variance,
)
from .stats import (
    DEFAULT_DECAY,
    ModelSpec,
    StatTerm,
    change_statistics,
    dyad_change_matrix,
    statistics,
)

__version__ = "0.1.0"

__all__ = [
    "AicReport",
    "BoundaryMleError",
    "ConfigError",
    "DEFAULT_DECAY",
    "DegeneracyError",
    "EdgeListParseError",
    "EnumerationLimitError",
    "FitResult",
    "GofReport",
    "InvalidNodeError",
    "McmleConfig",
    "McmleResult",
    "MergmError",
    "ModelSpec",
    "ModelSpecError",
    "NodeEffects",
    "SampleBatch",
    "SamplerConfig",
    "StatTerm",
    "UndirectedNetwork",
    "aic_ergm",
    "aic_mergm",
    "build_dyad_design",
    "change_statistics",
    "compare_aic",
    "complete_network",
    "dyad_change_matrix",
    "empty_network",
    "estimate_log_kappa",
    "estimate_var_t",
    "fisher_variance",
    "fit_ergm",
    "fit_mergm",
    "fit_pql",
    "fit_theta",
    "gof_run",
    "mple",
    "sample",
    "sample_chains",
    "statistics",
    "__version__",
]
