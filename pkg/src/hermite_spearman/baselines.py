"""Reference estimators: exact Spearman (average ranks), moving-window Spearman,
and an exponentially weighted Pearson correlation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.signal import lfilter
from scipy.stats import rankdata

from .errors import ContractError


class UndefinedCorrelation(ContractError):
    """Correlation requested where it does not exist (too few points, zero spread)."""


@dataclass(frozen=True)
class RankedSample:
    x: np.ndarray
    y: np.ndarray
    r: np.ndarray
    s: np.ndarray

    @classmethod
    def from_pairs(cls, x, y) -> "RankedSample":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ContractError("x and y must be 1-d arrays of equal length")
        return cls(x, y, rankdata(x, method="average"), rankdata(y, method="average"))

    def correlation(self) -> float:
        n = self.r.size
        if n < 2:
            raise UndefinedCorrelation(f"need at least 2 pairs, got {n}")
        dr = self.r - self.r.mean()
        ds = self.s - self.s.mean()
        denom = math.sqrt(float(dr @ dr) * float(ds @ ds))
        if denom == 0.0:
            raise UndefinedCorrelation("a margin is constant; rank correlation undefined")
        return float(dr @ ds) / denom


def exact_spearman(x, y=None) -> float:
    """Sample Spearman's rho: Pearson correlation of average-tie ranks.

    Accepts either ``exact_spearman(x, y)`` or a single ``(n, 2)`` array of pairs.
    """
    if y is None:
        pairs = np.asarray(x, dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ContractError("expected an (n, 2) array of pairs")
        x, y = pairs[:, 0], pairs[:, 1]
    return RankedSample.from_pairs(x, y).correlation()


def moving_window_spearman(x, y, w: int) -> Iterator[tuple[int, float | None]]:
    """Yield ``(i, rho)`` for 1-based steps i >= w over the trailing window of size w.

    Windows whose rank correlation is undefined yield ``None``.
    """
    if w < 2:
        raise ContractError(f"window must be >= 2, got {w}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    for end in range(w, x.size + 1):
        try:
            yield end, exact_spearman(x[end - w:end], y[end - w:end])
        except UndefinedCorrelation:
            yield end, None


class WindowSpearman:
    """Streaming form of ``moving_window_spearman`` over a bounded buffer."""

    def __init__(self, w: int):
        if w < 2:
            raise ContractError(f"window must be >= 2, got {w}")
        self.w = w
        self.count = 0
        self._x = np.empty(w)
        self._y = np.empty(w)

    def update(self, x: float, y: float) -> float | None:
        pos = self.count % self.w
        self._x[pos] = x
        self._y[pos] = y
        self.count += 1
        if self.count < self.w:
            return None
        # restore arrival order so results match moving_window_spearman bit for bit
        order = np.roll(np.arange(self.w), -(pos + 1))
        try:
            return exact_spearman(self._x[order], self._y[order])
        except UndefinedCorrelation:
            return None


@dataclass
class EwPearsonState:
    """Exponentially weighted means, variances and covariance of a pair stream.

    The first observation sets the means to the data and the variances and
    covariance to 1; later updates use deviations from the *updated* means.
    """

    lam: float
    count: int = 0
    mean_x: float = 0.0
    mean_y: float = 0.0
    var_x: float = 0.0
    var_y: float = 0.0
    cov: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise ContractError(f"lambda must lie in (0, 1], got {self.lam!r}")

    def estimate(self) -> float | None:
        prod = self.var_x * self.var_y
        if self.count == 0 or not prod > 0.0:
            return None
        return self.cov / math.sqrt(prod)

    def update(self, x: float, y: float) -> float | None:
        lam = self.lam
        self.count += 1
        if self.count == 1:
            self.mean_x, self.mean_y = float(x), float(y)
            self.var_x = self.var_y = self.cov = 1.0
            return self.estimate()
        self.mean_x = lam * x + (1.0 - lam) * self.mean_x
        self.mean_y = lam * y + (1.0 - lam) * self.mean_y
        dx = x - self.mean_x
        dy = y - self.mean_y
        self.var_x = lam * dx * dx + (1.0 - lam) * self.var_x
        self.var_y = lam * dy * dy + (1.0 - lam) * self.var_y
        self.cov = lam * dx * dy + (1.0 - lam) * self.cov
        return self.estimate()


def ew_pearson_update(state: EwPearsonState, x: float, y: float) -> tuple[EwPearsonState, float | None]:
    est = state.update(x, y)
    return state, est


def _ew_filter(values: np.ndarray, lam: float, first: float) -> np.ndarray:
    # out_1 = first, out_i = lam * values_i + (1 - lam) * out_{i-1}
    out = np.empty_like(values)
    out[0] = first
    if values.size > 1:
        out[1:], _ = lfilter([lam], [1.0, -(1.0 - lam)], values[1:], zi=[(1.0 - lam) * first])
    return out


def ew_pearson_path(x, y, lam: float) -> np.ndarray:
    """Vectorized per-step EW Pearson estimates from an empty state (NaN where undefined)."""
    if not 0.0 < lam <= 1.0:
        raise ContractError(f"lambda must lie in (0, 1], got {lam!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mx = _ew_filter(x, lam, x[0])
    my = _ew_filter(y, lam, y[0])
    dx = x - mx
    dy = y - my
    vx = _ew_filter(dx * dx, lam, 1.0)
    vy = _ew_filter(dy * dy, lam, 1.0)
    c = _ew_filter(dx * dy, lam, 1.0)
    prod = vx * vy
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(prod > 0.0, c / np.sqrt(prod), np.nan)

