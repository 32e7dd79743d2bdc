"""Penalized semi-parallel cumulative-logit regression."""

from _semiord import (  # noqa: F401
    CoefficientSet,
    ConfigErr,
    HyperParams,
    InvalidRegionError,
    ModelFit,
    Restriction,
    StructuralErr,
    cumulative_probabilities,
    fit,
    log_likelihood,
    misclassification,
    predict_probabilities,
    pseudo_r2,
    quadrant,
    quantile_type7,
    rotate,
    rps,
)

__all__ = [
    "CoefficientSet",
    "ConfigErr",
    "HyperParams",
    "InvalidRegionError",
    "ModelFit",
    "Restriction",
    "StructuralErr",
    "cumulative_probabilities",
    "fit",
    "log_likelihood",
    "misclassification",
    "predict_probabilities",
    "pseudo_r2",
    "quadrant",
    "quantile_type7",
    "rotate",
    "rps",
]
