"""p-variation statistics for weighted sums of short-memory linear processes.

The library simulates short-memory linear processes, computes the exact
p-variation of their partial-sum paths, calibrates the Wiener p-variation
limit law by Monte Carlo, and builds least-squares regression statistics
and a multiple change-point test on top.
"""

__version__ = "0.1.0"

from .changepoint import (
    ChangeModel,
    TestReport,
    bartlett_lrv,
    cp_test,
    drift_functional,
    lse_segments,
    simulate_cpm,
    size_power_study,
    tn_statistic,
)
from .errors import (
    ConfigurationError,
    DegenerateDesignError,
    DegenerateFilterError,
    DegeneratePartitionError,
    OracleSizeError,
    PvarstatError,
    TableMismatchError,
    UnsupportedExponentError,
    ValidationError,
)
from .filters import (
    FilterSpec,
    InnovationSpec,
    Series,
    a_psi,
    simulate_path,
    truncate_filter,
)
from .funcspace import (
    Polynomial,
    PowerFunction,
    StepFunction,
    eval_grid,
    function_from_config,
    indicator,
    integral_sq,
    is_in_Fq_delta,
    qvar_norm,
    qvar_norm_step,
    riemann_sums,
    weighted_sum,
)
from .limits import (
    CriticalValueTable,
    EmpiricalSample,
    build_cv_table,
    isonormal_marginal,
    ks_distance,
    pvar_limit_null_sample,
    quantile,
    scaled_walk_pvar,
    wiener_pvar_sample,
)
from .pvar import (
    PvarResult,
    pvar_bruteforce,
    pvar_dp,
    pvar_norm,
    pvar_partial_sum,
    reduce_to_extrema,
)
from .regress import (
    RegressionScenario,
    beta_clt_study,
    lse_beta,
    qn_stat,
    simulate_regression,
    wn_stat,
)
from .rng import GENERATOR_TAG, derived_rng, make_rng, map_indexed

__all__ = [name for name in dir() if not name.startswith("_")]
