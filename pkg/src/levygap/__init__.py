"""Discrete-monitoring bias of Lévy suprema: exact gaps, asymptotics, simulation and pricing."""
from .asymptotics import (
    beta1,
    classify_rate,
    expansion_fa_sigma_pos,
    expansion_fa_sigma_zero,
    expansion_fv,
    riemann_zeta_unit_interval,
    stable_limit,
)
from .errors import (
    ConfigError,
    DegenerateInput,
    DomainError,
    HypothesisFailure,
    HypothesisWarning,
    LevyGapError,
    MomentFailure,
    NotIntegrable,
    QuadratureFailure,
    UnsupportedClass,
)
from .lab import fit_rate, run_correction_study, run_gap_study, verify_prediction
from .levy import (
    CompoundPoisson,
    DoubleExponential,
    LevyModel,
    NoJumps,
    Normal,
    PointMass,
    Stable,
    VarianceGamma,
    check_exp_moment,
    check_integrability,
    dual,
)
from .paths import supremum_batch
from .pricing import (
    MarketSpec,
    MonteCarlo,
    OptionSpec,
    correct_continuous_from_discrete,
    correct_discrete_from_continuous,
    price_continuous,
    price_discrete,
    rate_bound_check,
    risk_neutral_drift,
)
from .rng import RngStreamSpec
from .spitzer import continuous_sup_mean, discrete_sup_mean, expected_positive_part, gap_curve, gap_mean

__version__ = "0.1.0"

__all__ = [
    "CompoundPoisson",
    "ConfigError",
    "DegenerateInput",
    "DomainError",
    "DoubleExponential",
    "HypothesisFailure",
    "HypothesisWarning",
    "LevyGapError",
    "LevyModel",
    "MarketSpec",
    "MomentFailure",
    "MonteCarlo",
    "NoJumps",
    "Normal",
    "NotIntegrable",
    "OptionSpec",
    "PointMass",
    "QuadratureFailure",
    "RngStreamSpec",
    "Stable",
    "UnsupportedClass",
    "VarianceGamma",
    "beta1",
    "check_exp_moment",
    "check_integrability",
    "classify_rate",
    "continuous_sup_mean",
    "correct_continuous_from_discrete",
    "correct_discrete_from_continuous",
    "discrete_sup_mean",
    "dual",
    "expansion_fa_sigma_pos",
    "expansion_fa_sigma_zero",
    "expansion_fv",
    "expected_positive_part",
    "fit_rate",
    "gap_curve",
    "gap_mean",
    "price_continuous",
    "price_discrete",
    "rate_bound_check",
    "riemann_zeta_unit_interval",
    "risk_neutral_drift",
    "run_correction_study",
    "run_gap_study",
    "stable_limit",
    "supremum_batch",
    "verify_prediction",
]
