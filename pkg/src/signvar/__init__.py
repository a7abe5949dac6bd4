"""Posterior sampling for structural VARs identified by inequality
restrictions on impulse responses.

The package offers two samplers over the same restricted posterior: an
accept-reject scheme (exact independent draws, cost inverse to the
restricted set's posterior mass) and a slice-within-Gibbs scheme whose
cost stays nearly flat as restrictions tighten. Diagnostics built on
multivariate effective sample size make the two comparable per unit of
compute.
"""

from ._version import __version__
from .accept_reject import ArStats, ar_draw, ar_run, draw_unrestricted
from .config import RunConfig, load_run_config
from .conjugate import (
    MinnesotaHyper,
    NiwParams,
    OrthogonalLatent,
    WishartLatent,
    coef_log_density,
    draw_coefficients,
    draw_orthogonal_latent,
    draw_wishart_latent,
    latent_to_covariance,
    latent_to_orthogonal,
    minnesota_prior,
    posterior,
)
from .diagnostics import (
    DiagnosticsReport,
    QuantileTable,
    compute_diagnostics,
    draws_per_iid,
    impact_functional,
    irf_tensor,
    minutes_per_1000_effective,
    multivariate_ess,
    quantile_table,
    univariate_ess,
)
from .errors import (
    BudgetExceededError,
    ConfigError,
    DataError,
    DegenerateDrawsError,
    DegenerateLatentError,
    InfeasibleError,
    NumericalError,
    ShrinkBracketError,
    SignvarError,
)
from .ess import EssTarget, ess_step
from .gibbs import (
    ChainState,
    GibbsSampler,
    PosteriorDraws,
    SamplerConfig,
    run_chain,
)
from .model import (
    ImpulseResponses,
    ModelSpec,
    OrthogonalParams,
    ReducedFormParams,
    StructuralParams,
    TimeSeriesData,
    build_regressors,
    chol_lower,
    impulse_responses,
    to_orthogonal,
    to_structural,
)
from .pipeline import RunResult, execute_run
from .restrictions import (
    RankingRestriction,
    RatioBound,
    RestrictionSet,
    SignRestriction,
    evaluate,
    indicator,
    restriction_set_from_dicts,
    restriction_set_to_dicts,
)
from .rng import derive_rng
from .storage import (
    export_draws_csv,
    load_series_csv,
    read_draws,
    save_matrix_csv,
    write_draws,
    write_summary_csv,
    write_sweep_csv,
)
from .toy import (
    BASELINE_SIGMA_TR,
    ArcEssResult,
    CircleArc,
    SweepRow,
    ar_expected_trials,
    ar_mean_trials_mc,
    arc_from_sigma_tr,
    baseline_arc_length,
    ess_arc_chain,
    sweep_arc_grid,
)

__all__ = [name for name in dir() if not name.startswith("_")]
