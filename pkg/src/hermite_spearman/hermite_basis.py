"""Normalized Hermite functions, their running integrals, and the W/z cache.

The normalized Hermite function of order k is

    h_k(x) = (2^k k! sqrt(pi))^(-1/2) exp(-x^2/2) H_k(x)

and is evaluated with the three-term recurrence written directly for h_k so
that no factorials appear. Integrals F_k(x) = int_{-inf}^x h_k(t) dt use the
companion recurrence obtained from h_k' = sqrt(k/2) h_{k-1} - sqrt((k+1)/2) h_{k+1}.
"""
from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr

from .errors import ContractError, InputError

MAX_ORDER = 50
PI_QUARTER = math.pi ** -0.25  # h_0(0), the largest value any h_k attains

# Gauss-Legendre panels for the W integrals. The integrand decays like
# exp(-u^2/2) * poly(u), negligible well inside +/-40 for k <= 50.
QUAD_HALF_WIDTH = 40.0
QUAD_PANEL_WIDTH = 0.5
QUAD_POINTS = 20
IDENTITY_TOL = 1e-10

# Recurrence coefficients, precomputed for the scalar hot path.
_UP = [math.sqrt(2.0 / (k + 1)) for k in range(MAX_ORDER + 1)]
_DOWN = [math.sqrt(k / (k + 1)) for k in range(MAX_ORDER + 1)]


def _check_order(N: int, upper: int | None = None) -> int:
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ContractError(f"order must be an integer >= 1, got {N!r}")
    if upper is not None and N > upper:
        raise ContractError(f"order must be <= {upper}, got {N}")
    return int(N)


def _hermite_scalar(x: float, N: int) -> np.ndarray:
    h = [0.0] * (N + 1)
    h0 = PI_QUARTER * math.exp(-0.5 * x * x)
    h[0] = h0
    h[1] = math.sqrt(2.0) * x * h0
    for k in range(1, N):
        h[k + 1] = x * _UP[k] * h[k] - _DOWN[k] * h[k - 1]
    return np.array(h)


def _hermite_array(x: np.ndarray, N: int) -> np.ndarray:
    out = np.empty(x.shape + (N + 1,))
    out[..., 0] = PI_QUARTER * np.exp(-0.5 * x * x)
    out[..., 1] = math.sqrt(2.0) * x * out[..., 0]
    for k in range(1, N):
        out[..., k + 1] = x * _UP[k] * out[..., k] - _DOWN[k] * out[..., k - 1]
    return out


def eval_hermite_vector(x, N: int) -> np.ndarray:
    """Return ``[h_0(x), ..., h_N(x)]``.

    ``x`` may be a float or an array; array input yields shape ``x.shape + (N+1,)``.
    """
    N = _check_order(N, MAX_ORDER)
    if np.ndim(x) == 0:
        x = float(x)
        if not math.isfinite(x):
            raise InputError(f"Hermite functions need a finite argument, got {x!r}")
        return _hermite_scalar(x, N)
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InputError("Hermite functions need finite arguments")
    return _hermite_array(x, N)


def eval_hermite_cdf_vector(x, N: int) -> np.ndarray:
    """Return ``[F_0(x), ..., F_N(x)]`` with ``F_k(x) = int_{-inf}^x h_k``.

    Infinite arguments act as sentinels: ``F_k(+inf) = z_k`` and ``F_k(-inf) = 0``.
    """
    N = _check_order(N, MAX_ORDER)
    xa = np.asarray(x, dtype=float)
    if np.any(np.isnan(xa)):
        raise InputError("CDF basis needs a non-NaN argument")
    finite = np.isfinite(xa)
    h = _hermite_array(np.where(finite, xa, 0.0), N)
    h[~finite] = 0.0

    F = np.empty(xa.shape + (N + 1,))
    F[..., 0] = math.sqrt(2.0) * math.pi ** 0.25 * ndtr(xa)
    F[..., 1] = -math.sqrt(2.0) * h[..., 0]
    for k in range(1, N):
        F[..., k + 1] = _UP[k] * (math.sqrt(k / 2.0) * F[..., k - 1] - h[..., k])
    return F


def hermite_integrals(N: int) -> np.ndarray:
    """Closed-form ``z_k = int h_k`` for k = 0..N; odd entries are exactly zero."""
    N = _check_order(N, MAX_ORDER)
    z = np.zeros(N + 1)
    z[0] = math.sqrt(2.0) * math.pi ** 0.25
    for k in range(1, N):
        z[k + 1] = _DOWN[k] * z[k - 1]
    return z


@dataclass(frozen=True, eq=False)
class BasisCache:
    """Precomputed ``W[k, l] = int h_k(u) F_l(u) du`` and ``z`` for one order N."""

    order: int
    W: np.ndarray
    z: np.ndarray

    def identity_residual(self) -> float:
        """max |W + W^T - z z^T|, zero up to quadrature error."""
        return float(np.max(np.abs(self.W + self.W.T - np.outer(self.z, self.z))))

    def to_dict(self) -> dict:
        return {"order": self.order, "z": self.z.tolist(), "W": self.W.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, payload: dict) -> "BasisCache":
        N = _check_order(payload["order"], MAX_ORDER)
        W = np.array(payload["W"], dtype=float)
        z = np.array(payload["z"], dtype=float)
        if W.shape != (N + 1, N + 1) or z.shape != (N + 1,):
            raise ContractError("basis payload shapes do not match its order")
        return _freeze(N, W, z)

    @classmethod
    def from_json(cls, text: str) -> "BasisCache":
        return cls.from_dict(json.loads(text))


def _freeze(N: int, W: np.ndarray, z: np.ndarray) -> BasisCache:
    W = np.array(W, dtype=float)
    z = np.array(z, dtype=float)
    W.flags.writeable = False
    z.flags.writeable = False
    return BasisCache(order=N, W=W, z=z)


def _quadrature_nodes() -> tuple[np.ndarray, np.ndarray]:
    t, w = leggauss(QUAD_POINTS)
    n_panels = int(round(2 * QUAD_HALF_WIDTH / QUAD_PANEL_WIDTH))
    left = -QUAD_HALF_WIDTH + QUAD_PANEL_WIDTH * np.arange(n_panels)
    half = 0.5 * QUAD_PANEL_WIDTH
    nodes = (left[:, None] + half * (t[None, :] + 1.0)).ravel()
    weights = np.tile(half * w, n_panels)
    return nodes, weights


@functools.lru_cache(maxsize=None)
def build_basis_cache(N: int) -> BasisCache:
    """Build (and memoize) the immutable cache for order ``N``, 1 <= N <= 50."""
    N = _check_order(N, MAX_ORDER)
    nodes, weights = _quadrature_nodes()
    h = _hermite_array(nodes, N)
    F = eval_hermite_cdf_vector(nodes, N)
    W = (h * weights[:, None]).T @ F
    z = hermite_integrals(N)

    cache = _freeze(N, W, z)
    if not np.all(np.isfinite(W)):
        raise ContractError("W contains non-finite entries")
    residual = cache.identity_residual()
    if residual > IDENTITY_TOL:
        raise ContractError(
            f"W + W^T - z z^T residual {residual:.3e} exceeds {IDENTITY_TOL:g}; "
            "quadrature is misconfigured"
        )
    return cache
