"""Personalized differentially private ridge regression by output perturbation."""

from .baselines import (
    JorgensenConfig,
    ThresholdRule,
    fit_jorgensen,
    fit_non_personalized,
    jorgensen_subsample,
    jorgensen_threshold,
)
from .bounds import AccuracyBoundInput, accuracy_bound, min_gram_eigenvalue
from .errors import (
    DegenerateColumn,
    DimensionMismatch,
    EmptySplit,
    EmptySubsample,
    InvalidBudget,
    MalformedCsv,
    NumericalFailure,
    PdpRidgeError,
    PlanInvalid,
    ValidationError,
)
from .noise import NoiseParams, derive_seed, make_rng, sample_noise, sample_radius, sample_unit_sphere
from .pdp_op import (
    Calibration,
    PrivacyProfile,
    PrivateModel,
    Regime,
    b_lambda,
    calibrate,
    fit,
    sensitivity_bound,
)
from .ridge import Dataset, RidgeConfig, WeightVector, solve_weighted_ridge, weighted_ridge_loss

__all__ = [
    "AccuracyBoundInput",
    "Calibration",
    "Dataset",
    "DegenerateColumn",
    "DimensionMismatch",
    "EmptySplit",
    "EmptySubsample",
    "InvalidBudget",
    "JorgensenConfig",
    "MalformedCsv",
    "NoiseParams",
    "NumericalFailure",
    "PdpRidgeError",
    "PlanInvalid",
    "PrivacyProfile",
    "PrivateModel",
    "Regime",
    "RidgeConfig",
    "ThresholdRule",
    "ValidationError",
    "WeightVector",
    "accuracy_bound",
    "b_lambda",
    "calibrate",
    "derive_seed",
    "fit",
    "fit_jorgensen",
    "fit_non_personalized",
    "jorgensen_subsample",
    "jorgensen_threshold",
    "make_rng",
    "min_gram_eigenvalue",
    "sample_noise",
    "sample_radius",
    "sample_unit_sphere",
    "sensitivity_bound",
    "solve_weighted_ridge",
    "weighted_ridge_loss",
]

__version__ = "0.1.0"
