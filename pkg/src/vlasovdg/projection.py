"""Piecewise Legendre representation of a phase-space density.

A :class:`DGField` stores one coefficient block ``b[i, j, k, m]`` per cell
``R_ij``; ``k`` indexes the Legendre degree in x and ``m`` the degree in v.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .legendre import gauss_rule, legendre_vandermonde

DUMP_MAGIC = "# vlasovdg field dump v1"


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``[x_left, x_left + length] x [-v_max, v_max]``."""

    length: float
    v_max: float
    nx: int
    nv: int
    degree: int
    x_left: float = 0.0

    def __post_init__(self):
        if not (self.length > 0 and self.v_max > 0):
            raise ValueError("length and v_max must be positive")
        if self.nx < 1 or self.nv < 1:
            raise ValueError("cell counts must be at least 1")
        if self.degree < 0:
            raise ValueError("degree must be non-negative")

    @property
    def hx(self):
        return self.length / self.nx

    @property
    def hv(self):
        return 2.0 * self.v_max / self.nv

    @property
    def nb(self):
        return self.degree + 1

    @property
    def shape(self):
        return (self.nx, self.nv, self.nb, self.nb)

    def x_edges(self):
        return self.x_left + self.hx * np.arange(self.nx + 1)

    def v_edges(self):
        return -self.v_max + self.hv * np.arange(self.nv + 1)

    def x_centers(self):
        return self.x_left + self.hx * (np.arange(self.nx) + 0.5)

    def v_centers(self):
        return -self.v_max + self.hv * (np.arange(self.nv) + 0.5)

    def same_domain(self, other, rtol=1e-12):
        return (np.isclose(self.length, other.length, rtol=rtol)
                and np.isclose(self.v_max, other.v_max, rtol=rtol)
                and np.isclose(self.x_left, other.x_left, rtol=rtol, atol=rtol))


@dataclass(frozen=True)
class DGField:
    grid: GridSpec
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {c.shape} does not match grid {self.grid.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape))

    def with_coeffs(self, coeffs):
        return DGField(self.grid, coeffs)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.coeffs)))


def _weighted_basis(degree, rule):
    """``W[k, p] = (2k+1)/2 * w_p * p_k(xi_p)``: projection weights on [-1, 1]."""
    V = legendre_vandermonde(degree, rule.nodes)
    scale = (2 * np.arange(degree + 1) + 1) / 2.0
    return scale[:, None] * V * rule.weights[None, :]


def project(g, grid: GridSpec, quad_nodes_per_dim=None) -> DGField:
    """L2-orthogonal projection of ``g(x, v)`` onto the piecewise polynomial space.

    ``g`` must accept broadcastable numpy arrays. The cell integrals use a
    tensor Gauss rule with ``quad_nodes_per_dim`` nodes per direction
    (default ``max(degree + 4, 8)``).
    """
    if quad_nodes_per_dim is None:
        quad_nodes_per_dim = max(grid.degree + 4, 8)
    if quad_nodes_per_dim < grid.degree + 1:
        raise ValueError(f"need at least {grid.degree + 1} quadrature nodes per dimension")
    rule = gauss_rule(quad_nodes_per_dim)
    xs = grid.x_centers()[:, None] + 0.5 * grid.hx * rule.nodes[None, :]
    vs = grid.v_centers()[:, None] + 0.5 * grid.hv * rule.nodes[None, :]
    samples = np.asarray(g(xs[:, :, None, None], vs[None, None, :, :]), dtype=float)
    samples = np.broadcast_to(samples, xs.shape + vs.shape)
    if not np.all(np.isfinite(samples)):
        raise ValueError("g produced non-finite samples")
    W = _weighted_basis(grid.degree, rule)
    coeffs = np.einsum("ipjq,kp,mq->ijkm", samples, W, W, optimize=True)
    return DGField(grid, coeffs)


def _locate(x, left, h, n):
    """Cell index and reference coordinate; left-closed cells, last cell closed."""
    s = (x - left) / h
    idx = np.clip(np.floor(s).astype(int), 0, n - 1)
    xi = 2.0 * (s - idx) - 1.0
    return idx, xi


def _check_inside(grid, x, v):
    tol = 1e-12 * max(grid.length, grid.v_max)
    x_right = grid.x_left + grid.length
    if np.any((x < grid.x_left - tol) | (x > x_right + tol)):
        raise ValueError("x outside the grid domain")
    if np.any((v < -grid.v_max - tol) | (v > grid.v_max + tol)):
        raise ValueError("v outside the grid domain")


def evaluate(f: DGField, x, v):
    """Point values of ``f``; ``x`` and ``v`` broadcast against each other."""
    x, v = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(v, dtype=float))
    grid = f.grid
    _check_inside(grid, x, v)
    i, xi = _locate(x, grid.x_left, grid.hx, grid.nx)
    j, eta = _locate(v, -grid.v_max, grid.hv, grid.nv)
    Px = legendre_vandermonde(grid.degree, xi)
    Pv = legendre_vandermonde(grid.degree, eta)
    blocks = f.coeffs[i, j]
    out = np.einsum("...km,k...,m...->...", blocks, Px, Pv)
    return out if out.ndim else float(out)


def evaluate_grid(f: DGField, xs, vs):
    """Values on the tensor grid ``xs x vs``, shape ``(len(xs), len(vs))``."""
    grid = f.grid
    xs = np.asarray(xs, dtype=float)
    vs = np.asarray(vs, dtype=float)
    _check_inside(grid, xs, np.zeros(1))
    _check_inside(grid, np.full(1, grid.x_left), vs)
    i, xi = _locate(xs, grid.x_left, grid.hx, grid.nx)
    j, eta = _locate(vs, -grid.v_max, grid.hv, grid.nv)
    Px = legendre_vandermonde(grid.degree, xi)
    Pv = legendre_vandermonde(grid.degree, eta)
    # contract v first so the gathered array stays (nx, len(vs), nb)
    partial = np.einsum("ajkm,mj->jak", f.coeffs[:, j], Pv)  # (len(vs), nx, nb)
    return np.einsum("vxk,kx->xv", partial[:, i, :], Px)


def mass(f: DGField):
    g = f.grid
    return g.hx * g.hv * float(np.sum(f.coeffs[:, :, 0, 0]))


def _norm_weights(degree):
    return 1.0 / (2 * np.arange(degree + 1) + 1)


def norm(f: DGField, which="L2"):
    """L2 exactly from the coefficients; L1 and Linf from per-cell samples."""
    g = f.grid
    if which == "L2":
        w = _norm_weights(g.degree)
        return float(np.sqrt(g.hx * g.hv * np.einsum("ijkm,k,m->", f.coeffs ** 2, w, w)))
    if which == "L1":
        rule = gauss_rule(g.degree + 2)
        V = legendre_vandermonde(g.degree, rule.nodes)
        vals = np.einsum("ijkm,kp,mq->ijpq", f.coeffs, V, V)
        return float(0.25 * g.hx * g.hv * np.einsum("ijpq,p,q->", np.abs(vals), rule.weights, rule.weights))
    if which == "Linf":
        pts = np.linspace(-1.0, 1.0, g.degree + 3)
        V = legendre_vandermonde(g.degree, pts)
        vals = np.einsum("ijkm,kp,mq->ijpq", f.coeffs, V, V)
        return float(np.max(np.abs(vals)))
    raise ValueError(f"unknown norm {which!r}")


def dump_field(f: DGField, path):
    """Write ``f`` as plain text: header lines, then one line per cell in (i, j) order."""
    g = f.grid
    lines = [
        DUMP_MAGIC,
        f"length {g.length!r}",
        f"v_max {g.v_max!r}",
        f"x_left {g.x_left!r}",
        f"nx {g.nx}",
        f"nv {g.nv}",
        f"degree {g.degree}",
    ]
    flat = f.coeffs.reshape(g.nx * g.nv, g.nb * g.nb)
    lines.extend(" ".join(f"{c:.17g}" for c in row) for row in flat)
    Path(path).write_text("\n".join(lines) + "\n")


def load_field(path) -> DGField:
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != DUMP_MAGIC:
        raise ValueError(f"{path}: not a field dump")
    header = {}
    for line in text[1:7]:
        key, value = line.split()
        header[key] = value
    grid = GridSpec(
        length=float(header["length"]),
        v_max=float(header["v_max"]),
        nx=int(header["nx"]),
        nv=int(header["nv"]),
        degree=int(header["degree"]),
        x_left=float(header["x_left"]),
    )
    data = np.array([[float(t) for t in line.split()] for line in text[7:] if line.strip()])
    return DGField(grid, data.reshape(grid.shape))
