"""Python access to the shrinkage_lab C++ library.

Spectra are built once with ``build_spectrum`` and passed to the functionals,
the regression risk formulas and the LDA error formulas.
"""

from ._core import (
    ConfigError,
    ConvergenceError,
    DomainError,
    Error,
    EvaluationError,
    LimitingSpectrum,
    PopulationSpectrum,
    ShrinkageFunction,
    build_spectrum,
    compare_shrinkers,
    estimate_alpha2,
    gd_shrinkage,
    identity_curve,
    kernel_estimate,
    lda_error,
    learning_curve,
    lp_covariance_shrinker,
    lp_precision_shrinker,
    m_functional,
    mean_shrinker,
    optimal_shrinkage,
    relaxed_optimum,
    sample_eigenvalues,
    set_thread_count,
    t_functional,
    test_risk,
    two_resolvent_limit,
)

__all__ = [name for name in dir() if not name.startswith("_")]
