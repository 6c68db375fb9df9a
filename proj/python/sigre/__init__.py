"""Signature-kernel likelihood-to-evidence ratio estimation."""

from _sigre import (  # noqa: F401
    RatioEstimator,
    SigreError,
    bespoke_summaries,
    bootstrap_ci,
    fit_ratio,
    k2_kernel,
    ma2_loglik,
    mean_distance,
    median_pairwise_sq_dist,
    metropolis_hastings,
    mmd_sq_unbiased,
    ou_loglik,
    signature_kernel,
    simulate_gse,
    simulate_ma2,
    simulate_ou,
    sir_resample,
    time_augment,
    time_augment_timed,
    truncated_sig_inner,
    wasserstein,
    __version__,
)

__all__ = [
    "RatioEstimator",
    "SigreError",
    "bespoke_summaries",
    "bootstrap_ci",
    "fit_ratio",
    "k2_kernel",
    "ma2_loglik",
    "mean_distance",
    "median_pairwise_sq_dist",
    "metropolis_hastings",
    "mmd_sq_unbiased",
    "ou_loglik",
    "signature_kernel",
    "simulate_gse",
    "simulate_ma2",
    "simulate_ou",
    "sir_resample",
    "time_augment",
    "time_augment_timed",
    "truncated_sig_inner",
    "wasserstein",
    "__version__",
]
