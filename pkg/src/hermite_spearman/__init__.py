"""Streaming Spearman's rank correlation from Hermite series coefficient states."""
from .baselines import EwPearsonState, exact_spearman, moving_window_spearman
from .correlation import (
    CorrelationEstimate,
    estimate_spearman,
    grade_correlation_normal,
    lambda_window_equiv,
    predict_ew_variance,
    select_lambda,
    spearman_to_pearson,
)
from .errors import ContractError, InputError, NonFiniteObservation
from .hermite_basis import BasisCache, build_basis_cache, eval_hermite_cdf_vector, eval_hermite_vector
from .stream_state import CoefficientState, Standardizer, merge_stationary

__all__ = [
    "BasisCache",
    "CoefficientState",
    "ContractError",
    "CorrelationEstimate",
    "EwPearsonState",
    "InputError",
    "NonFiniteObservation",
    "Standardizer",
    "build_basis_cache",
    "estimate_spearman",
    "eval_hermite_cdf_vector",
    "eval_hermite_vector",
    "exact_spearman",
    "grade_correlation_normal",
    "lambda_window_equiv",
    "merge_stationary",
    "moving_window_spearman",
    "predict_ew_variance",
    "select_lambda",
    "spearman_to_pearson",
]
