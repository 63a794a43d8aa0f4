"""Monte Carlo experiment harness and verification checks."""
from .harness import (
    ExperimentConfig,
    RateFit,
    TrialRecord,
    fit_method,
    fit_rate,
    parallel_map,
    records_to_csv,
    resolve_params,
    run_error_experiment,
    rows_to_csv,
    summarize,
    sup_norm_error,
    worker_count,
)
from .verify import (
    anisotropic_schedule,
    counterexample_ordering,
    isotropic_schedule,
    run_counterexample,
    verify_aspect_lower_bound,
    verify_mondrian_geometry,
    verify_prt_diam_vol,
    verify_variance_bound,
    verify_volume_invariance,
)

__all__ = [
    "ExperimentConfig", "RateFit", "TrialRecord", "fit_method", "fit_rate", "parallel_map", "records_to_csv",
    "resolve_params", "run_error_experiment", "rows_to_csv", "summarize", "sup_norm_error", "worker_count",
    "anisotropic_schedule", "counterexample_ordering", "isotropic_schedule", "run_counterexample",
    "verify_aspect_lower_bound", "verify_mondrian_geometry", "verify_prt_diam_vol", "verify_variance_bound",
    "verify_volume_invariance",
]
