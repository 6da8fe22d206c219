"""High-dimensional alpha tests for time-varying factor models under dependence."""

from .blocklength import BlockLengthReport, pwsd_per_series, select_block_length
from .classical import cc_indep, max_test_indep, sum_test_indep, trace_sigma2_hat
from .combination import combine
from .dependent import (
    BootstrapPlan,
    LrvConfig,
    circular_blocks_resample,
    dcc_test,
    default_bandwidth,
    dependent_battery,
    dmax_test,
    dsum_test,
    lrv_bartlett,
)
from .dgp import AlphaAlternative, ExperimentPlan, simulate_panel
from .errors import (
    ConfigError,
    DegenerateVarianceError,
    DimensionError,
    DomainError,
    SingularDesignError,
    TvalphaError,
)
from .outcome import TEST_NAMES, TestOutcome
from .panel import FactorSeries, ReturnPanel
from .sieve import SieveFit, fit_sieve, score_process
from .splines import BasisEval, DesignMatrix, SplineConfig, build_basis, build_design

__version__ = "0.1.0"

__all__ = [
    "AlphaAlternative",
    "BasisEval",
    "BlockLengthReport",
    "BootstrapPlan",
    "ConfigError",
    "DegenerateVarianceError",
    "DesignMatrix",
    "DimensionError",
    "DomainError",
    "ExperimentPlan",
    "FactorSeries",
    "LrvConfig",
    "ReturnPanel",
    "SieveFit",
    "SingularDesignError",
    "SplineConfig",
    "TEST_NAMES",
    "TestOutcome",
    "TvalphaError",
    "build_basis",
    "build_design",
    "cc_indep",
    "circular_blocks_resample",
    "combine",
    "dcc_test",
    "default_bandwidth",
    "dependent_battery",
    "dmax_test",
    "dsum_test",
    "fit_sieve",
    "lrv_bartlett",
    "max_test_indep",
    "pwsd_per_series",
    "score_process",
    "select_block_length",
    "simulate_panel",
    "sum_test_indep",
    "trace_sigma2_hat",
]
