"""Conditional copula calibration estimation and GLR testing."""

from ._core import (  # noqa: F401
    BandwidthSelection,
    CalibrationModel,
    Dataset,
    GlrtResult,
    KernelConstants,
    LocalFit,
    ReplicateRecord,
    ScenarioResult,
    WilksSummary,
    __version__,
    chisq_upper_tail,
    conditional_quantile,
    copula_cdf,
    default_bandwidth_grid,
    ell,
    ell1,
    ell2,
    estimate_curve,
    fit_parametric,
    generate_dataset,
    glrt_p_value,
    kernel_constants,
    kernel_eval,
    kernel_self_convolution,
    local_polynomial_fit,
    log_density,
    loo_cv_bandwidth,
    null_dof,
    paper_bandwidth_grid,
    pseudo_observations,
    read_dataset_csv,
    run_scenario,
    run_test,
    sample_pairs,
    wilks_check,
)
