"""Independent oracles shared across test modules.

None of these reuse the package's recurrences: Hermite functions come from
numpy's physicists' Hermite series with explicit normalization, integrals from
adaptive quadrature.
"""
import math

import numpy as np
import pytest
from numpy.polynomial import hermite as H
from scipy import integrate

from hermite_spearman.hermite_basis import build_basis_cache


def hermite_poly_oracle(k: int, x):
    coef = np.zeros(k + 1)
    coef[k] = 1.0
    norm = (2.0 ** k * math.factorial(k) * math.sqrt(math.pi)) ** -0.5
    x = np.asarray(x, dtype=float)
    return norm * np.exp(-x * x / 2.0) * H.hermval(x, coef)


def hermite_cdf_oracle(k: int, x: float) -> float:
    f = lambda t: float(hermite_poly_oracle(k, t))
    # split at 0 so quad sees the oscillating core on a finite interval
    if x <= 0.0:
        val, _ = integrate.quad(f, -np.inf, x, epsabs=1e-13, epsrel=1e-13, limit=200)
        return val
    left, _ = integrate.quad(f, -np.inf, 0.0, epsabs=1e-13, epsrel=1e-13, limit=200)
    right, _ = integrate.quad(f, 0.0, x, epsabs=1e-13, epsrel=1e-13, limit=200)
    return left + right


def random_coefficient_state(rng, N):
    """Arbitrary coefficients within the bounds real states obey."""
    a1 = rng.uniform(-0.7, 0.7, N + 1)
    a2 = rng.uniform(-0.7, 0.7, N + 1)
    A = rng.uniform(-0.5, 0.5, (N + 1, N + 1))
    return a1, a2, A


def spearman_loop(a1, a2, A, W, z):
    """The four terms of the matrix form written as explicit index sums."""
    n = len(a1)
    t1 = t2 = t3 = t4 = 0.0
    for k in range(n):
        for i in range(n):
            for j in range(n):
                aij = A[i][j]
                t2 += a1[k] * W[i][k] * aij * z[j]
                for l in range(n):
                    t1 += a1[k] * W[i][k] * aij * W[j][l] * a2[l]
    for i in range(n):
        for j in range(n):
            for l in range(n):
                t3 += z[i] * A[i][j] * W[j][l] * a2[l]
            t4 += z[i] * A[i][j] * z[j]
    return 12.0 * t1 - 6.0 * t2 - 6.0 * t3 + 3.0 * t4


class GradeQuadrature:
    """12 * double integral of (F1 - 1/2)(F2 - 1/2) f over [-B, B]^2 on a tensor Gauss-Legendre grid.

    F_k at the nodes comes from adaptive quadrature of the polynomial oracle,
    so the check never touches the W matrix or the CDF recurrence.
    """

    def __init__(self, N: int, B: float = 12.0, panels: int = 48, points: int = 10):
        t, w = np.polynomial.legendre.leggauss(points)
        edges = np.linspace(-B, B, panels + 1)
        half = np.diff(edges) / 2.0
        self.nodes = ((edges[:-1] + half)[:, None] + half[:, None] * t[None, :]).ravel()
        self.weights = (half[:, None] * w[None, :]).ravel()
        self.h = np.column_stack([hermite_poly_oracle(k, self.nodes) for k in range(N + 1)])
        # cumulative integral node by node: integral to each node = integral to previous node + piece
        F = np.zeros((self.nodes.size, N + 1))
        for k in range(N + 1):
            f = lambda s, k=k: float(hermite_poly_oracle(k, s))
            acc, _ = integrate.quad(f, -np.inf, self.nodes[0], epsabs=1e-14, limit=200)
            F[0, k] = acc
            for m in range(1, self.nodes.size):
                piece, _ = integrate.quad(f, self.nodes[m - 1], self.nodes[m], epsabs=1e-15)
                acc += piece
                F[m, k] = acc
        self.F = F

    def __call__(self, a1, a2, A):
        F1 = self.F @ a1 - 0.5
        F2 = self.F @ a2 - 0.5
        dens = self.h @ A @ self.h.T  # f(x_i, y_j)
        wx = self.weights * F1
        wy = self.weights * F2
        return 12.0 * float(wx @ dens @ wy)


@pytest.fixture(scope="session")
def grade_quadrature():
    cache = {}

    def get(N):
        if N not in cache:
            cache[N] = GradeQuadrature(N)
        return cache[N]

    return get


@pytest.fixture(scope="session")
def cache20():
    return build_basis_cache(20)
