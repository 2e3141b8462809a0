"""Spearman's rank correlation from a Hermite coefficient state.

The estimate is the plug-in grade correlation

    R = 12 a1' W' A W a2 - 6 a1' W' A z - 6 z' A W a2 + 3 z' A z

which costs O(N^3) per call and does not depend on how many observations
produced the state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ContractError
from .hermite_basis import BasisCache
from .stream_state import CoefficientState


@dataclass(frozen=True)
class CorrelationEstimate:
    raw: float
    clamped: float
    pearson_from_spearman: float

    @classmethod
    def from_raw(cls, raw: float) -> "CorrelationEstimate":
        clamped = min(1.0, max(-1.0, raw))
        return cls(raw, clamped, spearman_to_pearson(clamped))

    def to_record(self, i: int, estimator: str | None = None) -> dict:
        rec = {"i": i, "raw": self.raw, "clamped": self.clamped, "pearson": self.pearson_from_spearman}
        if estimator is not None:
            rec["estimator"] = estimator
        return rec


def spearman_from_coefficients(a1, a2, A, cache: BasisCache) -> float:
    W, z = cache.W, cache.z
    WtA = W.T @ A
    Wa2 = W @ a2
    return float(
        12.0 * (a1 @ WtA @ Wa2)
        - 6.0 * (a1 @ WtA @ z)
        - 6.0 * (z @ A @ Wa2)
        + 3.0 * (z @ A @ z)
    )


def estimate_spearman(state: CoefficientState, cache: BasisCache) -> CorrelationEstimate:
    if state.order != cache.order:
        raise ContractError(f"state order {state.order} != cache order {cache.order}")
    if state.count < 1:
        raise ContractError("no observations yet; the estimate is undefined")
    return CorrelationEstimate.from_raw(spearman_from_coefficients(state.a1, state.a2, state.A, cache))


def estimate_spearman_path(a1, a2, A, cache: BasisCache) -> np.ndarray:
    """Raw estimates for stacked states (leading axis = time), e.g. from ``ew_coefficient_path``."""
    W, z = cache.W, cache.z
    u = a1 @ W.T - 0.5 * z  # row i of (W a1 - z/2) per step
    v = a2 @ W.T - 0.5 * z
    return 12.0 * np.einsum("ti,tij,tj->t", u, A, v)


def spearman_to_pearson(r: float) -> float:
    """Pearson correlation implied by Spearman's rho under bivariate normality."""
    if not -1.0 <= r <= 1.0:
        raise ContractError(f"Spearman value must be in [-1, 1], got {r!r}")
    return 2.0 * math.sin(math.pi * r / 6.0)


def grade_correlation_normal(rho: float) -> float:
    """Population Spearman's rho of a bivariate normal with correlation ``rho``."""
    if not -1.0 <= rho <= 1.0:
        raise ContractError(f"correlation must be in [-1, 1], got {rho!r}")
    return 6.0 / math.pi * math.asin(rho / 2.0)


def select_lambda(sigma_tol: float) -> tuple[float, float]:
    """Largest weights keeping the steady-state sd of the estimate near ``sigma_tol``.

    Returns ``(exact, rough)`` where exact = 2s^2/(1+s^2) and rough = 2s^2.
    """
    if not 0.0 < sigma_tol <= 1.0:
        raise ContractError(f"sigma_tol must lie in (0, 1], got {sigma_tol!r}")
    s2 = sigma_tol * sigma_tol
    return 2.0 * s2 / (1.0 + s2), 2.0 * s2


def predict_ew_variance(lam: float, g: float) -> float:
    # lam = 1 is accepted as a boundary case
    if not 0.0 < lam <= 1.0:
        raise ContractError(f"lambda must lie in (0, 1], got {lam!r}")
    if g <= 0.0:
        raise ContractError(f"g must be positive, got {g!r}")
    return lam / (2.0 - lam) * g


def lambda_window_equiv(w: int) -> float:
    """EW weight whose mean observation age matches a moving window of size ``w``."""
    if w < 1:
        raise ContractError(f"window must be >= 1, got {w!r}")
    return 2.0 / (w + 1.0)


def window_from_lambda(lam: float) -> int:
    if not 0.0 < lam <= 1.0:
        raise ContractError(f"lambda must lie in (0, 1], got {lam!r}")
    return int(round(2.0 / lam - 1.0))


class GValue(NamedTuple):
    g: float
    se: float


# Steady-state variance factors for bivariate normal streams, keyed by (N, rho),
# with bootstrap standard errors.
G_TABLE: dict[tuple[int, float], GValue] = {
    (4, -0.75): GValue(0.701, 0.007), (6, -0.75): GValue(0.474, 0.005),
    (8, -0.75): GValue(0.407, 0.004), (10, -0.75): GValue(0.357, 0.004),
    (4, -0.50): GValue(0.891, 0.009), (6, -0.50): GValue(0.845, 0.008),
    (8, -0.50): GValue(0.757, 0.008), (10, -0.50): GValue(0.747, 0.007),
    (4, -0.25): GValue(1.106, 0.011), (6, -0.25): GValue(1.104, 0.011),
    (8, -0.25): GValue(1.027, 0.010), (10, -0.25): GValue(1.003, 0.010),
    (4, 0.00): GValue(1.182, 0.012), (6, 0.00): GValue(1.190, 0.012),
    (8, 0.00): GValue(1.129, 0.011), (10, 0.00): GValue(1.100, 0.011),
    (4, 0.25): GValue(1.112, 0.012), (6, 0.25): GValue(1.086, 0.011),
    (8, 0.25): GValue(1.028, 0.010), (10, 0.25): GValue(1.010, 0.010),
    (4, 0.50): GValue(0.886, 0.009), (6, 0.50): GValue(0.848, 0.009),
    (8, 0.50): GValue(0.747, 0.007), (10, 0.50): GValue(0.734, 0.007),
    (4, 0.75): GValue(0.718, 0.007), (6, 0.75): GValue(0.475, 0.005),
    (8, 0.75): GValue(0.395, 0.004), (10, 0.75): GValue(0.364, 0.004),
}


@dataclass(frozen=True)
class VarianceBudget:
    sigma_tol: float
    g_table: dict = field(default_factory=lambda: dict(G_TABLE))

    def __post_init__(self):
        if not 0.0 < self.sigma_tol <= 1.0:
            raise ContractError(f"sigma_tol must lie in (0, 1], got {self.sigma_tol!r}")

    def lambda_bound(self, rough: bool = False) -> float:
        exact, approx = select_lambda(self.sigma_tol)
        return approx if rough else exact

    def variance(self, lam: float, order: int, rho: float) -> float:
        key = (order, round(rho, 2))
        if key not in self.g_table:
            raise ContractError(f"no g value tabulated for N={order}, rho={rho}")
        return predict_ew_variance(lam, self.g_table[key].g)

    def within_budget(self, lam: float, order: int, rho: float) -> bool:
        return self.variance(lam, order, rho) <= self.sigma_tol ** 2
