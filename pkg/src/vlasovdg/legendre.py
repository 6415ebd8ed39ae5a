"""Legendre polynomials and Gauss-Legendre quadrature.

Everything here works on the reference interval [-1, 1]; physical cells are
handled through the affine map ``xi = 2 (x - left) / width - 1``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

_NEWTON_TOL = 1e-15
_NEWTON_MAXITER = 100


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.nodes)

    def mapped(self, a, b):
        """Nodes and weights for the interval [a, b]."""
        half = 0.5 * (b - a)
        return 0.5 * (a + b) + half * self.nodes, half * self.weights


def legendre_eval(l, xi):
    """Value of the standard Legendre polynomial p_l at ``xi`` (scalar or array)."""
    if l < 0:
        raise ValueError(f"degree must be non-negative, got {l}")
    xi = np.asarray(xi, dtype=float)
    p_prev = np.ones_like(xi)
    if l == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = xi.copy()
    for n in range(1, l):
        p_prev, p = p, ((2 * n + 1) * xi * p - n * p_prev) / (n + 1)
    return p if p.ndim else float(p)


def legendre_vandermonde(degree, xi):
    """Array ``V[l, ...] = p_l(xi)`` for ``l = 0..degree``."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty((degree + 1,) + xi.shape)
    out[0] = 1.0
    if degree >= 1:
        out[1] = xi
    for n in range(1, degree):
        out[n + 1] = ((2 * n + 1) * xi * out[n] - n * out[n - 1]) / (n + 1)
    return out


def scaled_legendre_eval(l, x, cell_left, cell_width):
    """p_l evaluated through the affine map of ``[cell_left, cell_left + cell_width]`` onto [-1, 1]."""
    if not cell_width > 0:
        raise ValueError("cell_width must be positive")
    xi = 2.0 * (np.asarray(x, dtype=float) - cell_left) / cell_width - 1.0
    return legendre_eval(l, xi)


def _legendre_and_derivative(n, x):
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    # p_n' = n (x p_n - p_{n-1}) / (x^2 - 1); nodes never reach +-1
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@functools.lru_cache(maxsize=None)
def gauss_rule(n) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [-1, 1], exact up to degree 2n - 1."""
    if n < 1:
        raise ValueError(f"a Gauss rule needs at least one node, got n={n}")
    if n == 1:
        return QuadratureRule(np.array([0.0]), np.array([2.0]))
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(_NEWTON_MAXITER):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    p, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # enforce exact symmetry of the rule
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(x, w)


def nodes_for_degree(d):
    """Smallest Gauss rule size that integrates degree ``d`` exactly."""
    return max(1, math.ceil((d + 1) / 2))
