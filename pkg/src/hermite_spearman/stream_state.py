"""Hermite coefficient state for stationary and exponentially weighted streams.

A state holds the marginal coefficient vectors ``a1`` (for x) and ``a2`` (for y)
and the bivariate coefficient matrix ``A``. In stationary mode every update is a
running mean; in exponentially weighted mode it is a convex combination with
weight ``lam`` on the newest observation. In both modes the first accepted
observation initializes the coefficients directly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import ContractError, InputError, NonFiniteObservation
from .hermite_basis import MAX_ORDER, _check_order, eval_hermite_vector


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not (0.0 < lam <= 1.0):
        raise ContractError(f"lambda must lie in (0, 1], got {lam!r}")
    return lam


class CoefficientState:
    """Live coefficient state of a bivariate stream.

    ``lam=None`` selects stationary mode (Algorithm-1 style running means);
    otherwise updates are exponentially weighted. ``count`` is the number of
    accepted observations, ``rejected`` the number refused as non-finite.
    """

    __slots__ = ("order", "lam", "count", "rejected", "a1", "a2", "A")

    def __init__(self, order: int, lam: float | None = None):
        self.order = _check_order(order, MAX_ORDER)
        self.lam = None if lam is None else _check_lambda(lam)
        self.count = 0
        self.rejected = 0
        self.a1 = np.zeros(self.order + 1)
        self.a2 = np.zeros(self.order + 1)
        self.A = np.zeros((self.order + 1, self.order + 1))

    @classmethod
    def stationary(cls, order: int) -> "CoefficientState":
        return cls(order)

    @classmethod
    def exp_weighted(cls, order: int, lam: float) -> "CoefficientState":
        return cls(order, lam)

    @property
    def is_stationary(self) -> bool:
        return self.lam is None

    def __repr__(self) -> str:
        mode = "stationary" if self.lam is None else f"ew(lam={self.lam})"
        return f"CoefficientState(order={self.order}, {mode}, count={self.count})"

    def copy(self) -> "CoefficientState":
        new = CoefficientState(self.order, self.lam)
        new.count = self.count
        new.rejected = self.rejected
        new.a1 = self.a1.copy()
        new.a2 = self.a2.copy()
        new.A = self.A.copy()
        return new

    @property
    def nbytes(self) -> int:
        return self.a1.nbytes + self.a2.nbytes + self.A.nbytes

    def _reject(self, x, y):
        self.rejected += 1
        raise NonFiniteObservation(
            f"non-finite observation ({x!r}, {y!r}) rejected; {self.rejected} rejected so far",
            self.rejected,
        )

    def update(self, x: float, y: float) -> "CoefficientState":
        """Absorb one observation in place and return ``self``."""
        x = float(x)
        y = float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            self._reject(x, y)
        hx = eval_hermite_vector(x, self.order)
        hy = eval_hermite_vector(y, self.order)
        self.count += 1
        i = self.count
        if i == 1:
            self.a1 = hx
            self.a2 = hy
            self.A = np.outer(hx, hy)
            return self
        if self.lam is None:
            keep = (i - 1) / i
            new = 1.0 / i
        else:
            keep = 1.0 - self.lam
            new = self.lam
        self.a1 = keep * self.a1 + new * hx
        self.a2 = keep * self.a2 + new * hy
        self.A = keep * self.A + new * np.outer(hx, hy)
        return self

    def update_batch(self, xs, ys) -> "CoefficientState":
        """Absorb a block of observations in order; equivalent to repeated ``update``.

        Non-finite pairs are skipped and counted in ``rejected``.
        """
        xs = np.asarray(xs, dtype=float).ravel()
        ys = np.asarray(ys, dtype=float).ravel()
        if xs.shape != ys.shape:
            raise ContractError("x and y blocks must have equal length")
        ok = np.isfinite(xs) & np.isfinite(ys)
        self.rejected += int(xs.size - ok.sum())
        xs, ys = xs[ok], ys[ok]
        k = xs.size
        if k == 0:
            return self
        hx = eval_hermite_vector(xs, self.order)
        hy = eval_hermite_vector(ys, self.order)

        if self.lam is None:
            n = self.count
            total = n + k
            self.a1 = (n * self.a1 + hx.sum(axis=0)) / total
            self.a2 = (n * self.a2 + hy.sum(axis=0)) / total
            self.A = (n * self.A + hx.T @ hy) / total
            self.count = total
            return self

        lam = self.lam
        # weight of observation j (0-based) after the block is lam * (1-lam)^(k-1-j);
        # with an empty state the first observation enters with weight (1-lam)^(k-1).
        weights = lam * (1.0 - lam) ** np.arange(k - 1, -1, -1, dtype=float)
        decay = (1.0 - lam) ** k
        if self.count == 0:
            weights[0] = (1.0 - lam) ** (k - 1)
            decay = 0.0
        self.a1 = decay * self.a1 + weights @ hx
        self.a2 = decay * self.a2 + weights @ hy
        self.A = decay * self.A + (hx * weights[:, None]).T @ hy
        self.count += k
        return self

    # snapshot format ---------------------------------------------------

    def to_dict(self) -> dict:
        mode = {"stationary": self.count} if self.lam is None else {"ew": self.lam}
        return {
            "order": self.order,
            "mode": mode,
            "a1": self.a1.tolist(),
            "a2": self.a2.tolist(),
            "A": self.A.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, payload: dict) -> "CoefficientState":
        mode = payload["mode"]
        if "stationary" in mode:
            state = cls(payload["order"])
            state.count = int(mode["stationary"])
        elif "ew" in mode:
            state = cls(payload["order"], mode["ew"])
            # EW snapshots carry no count; a non-zero state is past initialization.
            state.count = int(any(payload["a1"]) or any(payload["a2"]))
        else:
            raise ContractError(f"unknown state mode {mode!r}")
        N = state.order
        a1 = np.array(payload["a1"], dtype=float)
        a2 = np.array(payload["a2"], dtype=float)
        A = np.array(payload["A"], dtype=float)
        if a1.shape != (N + 1,) or a2.shape != (N + 1,) or A.shape != (N + 1, N + 1):
            raise ContractError("snapshot shapes do not match its order")
        state.a1, state.a2, state.A = a1, a2, A
        return state

    @classmethod
    def from_json(cls, text: str) -> "CoefficientState":
        return cls.from_dict(json.loads(text))


def update_stationary(state: CoefficientState, x: float, y: float) -> CoefficientState:
    if not state.is_stationary:
        raise ContractError("update_stationary needs a stationary state")
    return state.update(x, y)


def update_ew(state: CoefficientState, x: float, y: float) -> CoefficientState:
    if state.is_stationary:
        raise ContractError("update_ew needs an exponentially weighted state")
    return state.update(x, y)


def merge_stationary(s1: CoefficientState, s2: CoefficientState) -> CoefficientState:
    """Pool two stationary states built on disjoint parts of a sample."""
    if not (s1.is_stationary and s2.is_stationary):
        raise ContractError("only stationary states can be merged")
    if s1.order != s2.order:
        raise ContractError(f"order mismatch: {s1.order} vs {s2.order}")
    if s1.count < 1 or s2.count < 1:
        raise ContractError("both states must hold at least one observation")
    n1, n2 = s1.count, s2.count
    total = n1 + n2
    merged = CoefficientState(s1.order)
    merged.count = total
    merged.rejected = s1.rejected + s2.rejected
    merged.a1 = (n1 * s1.a1 + n2 * s2.a1) / total
    merged.a2 = (n1 * s1.a2 + n2 * s2.a2) / total
    merged.A = (n1 * s1.A + n2 * s2.A) / total
    return merged


def ew_coefficient_path(xs, ys, order: int, lam: float):
    """Per-step EW coefficients for a whole stream started from an empty state.

    Returns ``(a1, a2, A)`` with shapes ``(n, N+1)``, ``(n, N+1)`` and
    ``(n, N+1, N+1)``; row ``i`` equals the state after observation ``i+1``.
    """
    lam = _check_lambda(lam)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    hx = eval_hermite_vector(xs, order)
    hy = eval_hermite_vector(ys, order)
    n = xs.size
    stacked = np.concatenate(
        [hx, hy, (hx[:, :, None] * hy[:, None, :]).reshape(n, -1)], axis=1
    )
    # a_1 = h_1 exactly, then a_i = (1-lam) a_{i-1} + lam h_i
    path = np.empty_like(stacked)
    path[0] = stacked[0]
    if n > 1:
        path[1:], _ = lfilter(
            [lam], [1.0, -(1.0 - lam)], stacked[1:], axis=0,
            zi=((1.0 - lam) * stacked[0])[None, :],
        )
    m = order + 1
    return path[:, :m], path[:, m:2 * m], path[:, 2 * m:].reshape(n, m, m)


@dataclass
class Standardizer:
    """Welford running mean/variance for one margin.

    ``update`` standardizes with the statistics *before* the new value and
    passes values through until two observations with positive spread exist.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def update(self, v: float) -> float:
        v = float(v)
        if not math.isfinite(v):
            raise InputError(f"cannot standardize non-finite value {v!r}")
        sd = self.std
        out = (v - self.mean) / sd if self.count >= 2 and sd > 0.0 else v
        self.count += 1
        delta = v - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (v - self.mean)
        return out

    def transform(self, values) -> np.ndarray:
        """Vectorized ``update`` over a block; statistics end up as after the block."""
        v = np.asarray(values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise InputError("cannot standardize non-finite values")
        k = v.size
        if k == 0:
            return v.copy()
        # prefix statistics of the block, shifted by the prior mean for stability
        shift = self.mean if self.count else v[0]
        d = v - shift
        cnt = np.arange(1, k + 1)
        csum = np.cumsum(d)
        bmean = csum / cnt
        bm2 = np.maximum(np.cumsum(d * d) - csum * bmean, 0.0)

        # Chan combination of prior stats with each block prefix
        n0 = self.count
        tot = n0 + cnt
        delta = (bmean + shift) - self.mean
        mean_after = self.mean + delta * cnt / tot
        m2_after = self.m2 + bm2 + delta * delta * n0 * cnt / tot

        # statistics seen by value j are those after j values in total
        cnt_before = np.concatenate([[n0], tot[:-1]])
        mean_before = np.concatenate([[self.mean], mean_after[:-1]])
        m2_before = np.concatenate([[self.m2], m2_after[:-1]])
        with np.errstate(divide="ignore", invalid="ignore"):
            sd_before = np.sqrt(m2_before / np.maximum(cnt_before - 1, 1))
        use = (cnt_before >= 2) & (sd_before > 0.0)
        out = np.where(use, (v - mean_before) / np.where(use, sd_before, 1.0), v)

        self.count = int(tot[-1])
        self.mean = float(mean_after[-1])
        self.m2 = float(m2_after[-1])
        return out


def standardize_update(std: Standardizer, v: float) -> tuple[Standardizer, float]:
    out = std.update(v)
    return std, out
