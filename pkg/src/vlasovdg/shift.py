"""Translate-then-project operators for one direction of a DG field.

For a unit cell and a fractional shift ``d`` in [0, 1) the overlap integrals

    same[l][m](d)     = int_d^1 P_l(x) P_m(x - d) dx
    neighbor[l][m](d) = int_0^d P_l(x) P_m(x - d + 1) dx

(``P_l(x) = p_l(2x - 1)``) are polynomials of degree 2l+1 in ``d``.  They are
built once with exact rational arithmetic and evaluated in floating point.

A shift that varies with the transverse coordinate is integrated exactly by
splitting the transverse cell wherever ``floor(shift)`` changes and using a
Gauss rule on each piece that is exact for the resulting polynomial.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import legendre as npleg
from numpy.polynomial import polynomial as nppoly
from scipy.optimize import brentq

from .legendre import gauss_rule, legendre_vandermonde, nodes_for_degree

PERIODIC = "periodic"
ZERO_INFLOW = "zero_inflow"
BOUNDARIES = (PERIODIC, ZERO_INFLOW)

_ROOT_XTOL = 1e-14
_MIN_PIECE = 1e-15


# -- exact univariate polynomial helpers (ascending Fraction coefficients) --

def _padd(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def _pmul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _pscale(a, s):
    return [s * c for c in a]


def _ppow(a, n):
    out = [Fraction(1)]
    for _ in range(n):
        out = _pmul(out, a)
    return out


def _trim(a):
    a = list(a)
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


@functools.lru_cache(maxsize=None)
def unit_legendre(l):
    """Exact power-basis coefficients of ``p_l(2x - 1)``."""
    p_prev, p = [Fraction(1)], [Fraction(0), Fraction(1)]
    if l == 0:
        mono = p_prev
    else:
        for n in range(1, l):
            nxt = _padd(_pscale(_pmul([Fraction(0), Fraction(1)], p), Fraction(2 * n + 1, n + 1)),
                        _pscale(p_prev, Fraction(-n, n + 1)))
            p_prev, p = p, nxt
        mono = p
    # substitute x -> 2x - 1
    out = [Fraction(0)]
    for k, c in enumerate(mono):
        out = _padd(out, _pscale(_ppow([Fraction(-1), Fraction(2)], k), c))
    return tuple(_trim(out))


def _overlap(l, m, offset, lower, upper):
    """``int_{lower(d)}^{upper(d)} P_l(x) P_m(x + offset(d)) dx`` as a polynomial in d.

    ``offset``, ``lower`` and ``upper`` are exact polynomials in d.
    """
    cl, cm = unit_legendre(l), unit_legendre(m)
    # bivariate integrand: terms[a] is the d-polynomial multiplying x^a
    terms = {}
    for k, c in enumerate(cm):
        if not c:
            continue
        for r in range(k + 1):
            coef_d = _pscale(_ppow(offset, k - r), c * math.comb(k, r))
            for s, cs in enumerate(cl):
                if cs:
                    terms[r + s] = _padd(terms.get(r + s, [Fraction(0)]), _pscale(coef_d, cs))
    result = [Fraction(0)]
    for a, coef_d in terms.items():
        anti = _padd(_ppow(upper, a + 1), _pscale(_ppow(lower, a + 1), -1))
        result = _padd(result, _pscale(_pmul(coef_d, anti), Fraction(1, a + 1)))
    return tuple(_trim(result))


@dataclass(frozen=True)
class ShiftTable:
    degree: int
    same: tuple  # same[l][m] -> tuple of Fraction, ascending powers of d
    neighbor: tuple

    def __post_init__(self):
        width = 2 * self.degree + 2
        for name in ("same", "neighbor"):
            polys = getattr(self, name)
            arr = np.zeros((width, self.degree + 1, self.degree + 1))
            for l, row in enumerate(polys):
                for m, poly in enumerate(row):
                    arr[: len(poly), l, m] = [float(c) for c in poly]
            arr.setflags(write=False)
            object.__setattr__(self, f"_{name}_float", arr)

    def same_at(self, d):
        """Float values ``[l, m, ...]`` of the same-cell overlap at fractional shifts ``d``."""
        return nppoly.polyval(d, self._same_float)

    def neighbor_at(self, d):
        return nppoly.polyval(d, self._neighbor_float)


@functools.lru_cache(maxsize=None)
def build_shift_table(degree) -> ShiftTable:
    if degree < 0:
        raise ValueError("degree must be non-negative")
    d = [Fraction(0), Fraction(1)]
    one = [Fraction(1)]
    zero = [Fraction(0)]
    same = tuple(
        tuple(_overlap(l, m, offset=_pscale(d, -1), lower=d, upper=one) for m in range(degree + 1))
        for l in range(degree + 1))
    neighbor = tuple(
        tuple(_overlap(l, m, offset=[Fraction(1), Fraction(-1)], lower=zero, upper=d)
              for m in range(degree + 1))
        for l in range(degree + 1))
    return ShiftTable(degree, same, neighbor)


def format_poly(poly, var="d"):
    terms = []
    for k, c in enumerate(poly):
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        elif mag == 1:
            body = var if k == 1 else f"{var}^{k}"
        else:
            body = f"{mag}*{var}" if k == 1 else f"{mag}*{var}^{k}"
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    sign, body = terms[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def format_table(table: ShiftTable):
    """Exact rational listing of every table entry, one polynomial per line."""
    lines = [f"# shift table, degree {table.degree}, variable d in [0, 1)"]
    for name in ("same", "neighbor"):
        polys = getattr(table, name)
        for l in range(table.degree + 1):
            for m in range(table.degree + 1):
                lines.append(f"{name}[{l}][{m}] = {format_poly(polys[l][m])}")
    return "\n".join(lines)


# -- shift along a line of cells --

@dataclass(frozen=True)
class ShiftOperator:
    """Cell offsets and the matching coefficient maps ``M[o, l, j, m, n]``.

    New coefficients are ``out[i, l, j] = sum_o M[o, l, j, :, :] . line[i - offsets[o]]``.
    """
    offsets: np.ndarray
    matrices: np.ndarray


def _as_power_series(delta):
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    if not np.all(np.isfinite(delta)):
        raise ValueError("non-finite shift")
    power = npleg.leg2poly(delta)
    return nppoly.polytrim(power, 0.0) if np.any(power) else np.zeros(1)


def _crossings(power):
    """Points in (-1, 1) where the polynomial crosses an integer value."""
    deg = len(power) - 1
    if deg == 0:
        return []
    if deg == 1:
        c0, c1 = power
        lo, hi = sorted((c0 - c1, c0 + c1))
        ks = np.arange(math.floor(lo) + 1, math.ceil(hi))
        return sorted(((ks - c0) / c1).tolist())
    crit = nppoly.polyroots(nppoly.polyder(power))
    crit = sorted(r.real for r in np.atleast_1d(crit)
                  if abs(r.imag) < 1e-12 and -1.0 < r.real < 1.0)
    knots = [-1.0] + crit + [1.0]
    roots = []
    for s0, s1 in zip(knots[:-1], knots[1:]):
        y0, y1 = nppoly.polyval(s0, power), nppoly.polyval(s1, power)
        lo, hi = min(y0, y1), max(y0, y1)
        for k in range(math.floor(lo) + 1, math.ceil(hi)):
            roots.append(brentq(lambda s: nppoly.polyval(s, power) - k, s0, s1, xtol=_ROOT_XTOL))
    return sorted(roots)


def _identity(nb):
    eye = np.eye(nb)
    return np.einsum("lm,jn->ljmn", eye, eye)


def shift_operator(delta, table: ShiftTable) -> ShiftOperator:
    """Operator for the translation ``f(y - delta(xi) h, xi)`` followed by projection.

    ``delta`` holds the Legendre coefficients of the shift (in units of the
    cell width along the shifted direction) as a function of the transverse
    reference coordinate ``xi`` in [-1, 1].
    """
    nb = table.degree + 1
    power = _as_power_series(delta)
    if len(power) == 1 and float(power[0]).is_integer():
        return ShiftOperator(np.array([int(power[0])]), _identity(nb)[None])

    cuts = [-1.0] + _crossings(power) + [1.0]
    nq = nodes_for_degree(2 * table.degree + (2 * table.degree + 1) * (len(power) - 1))
    rule = gauss_rule(nq)
    scale = (2 * np.arange(nb) + 1).astype(float)
    by_offset = {}
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a < _MIN_PIECE:
            continue
        offset = math.floor(nppoly.polyval(0.5 * (a + b), power))
        xi, w = rule.mapped(a, b)
        frac = nppoly.polyval(xi, power) - offset
        V = legendre_vandermonde(table.degree, xi)
        wvv = np.einsum("q,jq,nq->jnq", w, V, V)
        for o, H in ((offset, table.same_at(frac)), (offset + 1, table.neighbor_at(frac))):
            M = np.einsum("jnq,lmq->ljmn", wvv, H)
            by_offset[o] = by_offset.get(o, 0.0) + M
    offsets = np.array(sorted(by_offset))
    mats = np.stack([by_offset[o] for o in offsets])
    mats *= 0.5 * scale[None, :, None, None, None] * scale[None, None, :, None, None]
    return ShiftOperator(offsets, mats)


def apply_shift(line, op: ShiftOperator, boundary=PERIODIC):
    """Apply ``op`` to ``line[i, m, n]`` (along index m, transverse index n).

    Returns ``(new_line, outflow)`` where ``outflow`` is the sum of cell
    averages that left the line (always 0 for periodic lines).
    """
    line = np.asarray(line, dtype=float)
    if boundary == PERIODIC:
        rolled = np.stack([np.roll(line, o, axis=0) for o in op.offsets])
        return np.einsum("oljmn,oimn->ilj", op.matrices, rolled), 0.0
    if boundary != ZERO_INFLOW:
        raise ValueError(f"unknown boundary {boundary!r}")
    n = line.shape[0]
    pad = int(np.max(np.abs(op.offsets)))
    ext = np.zeros((n + 2 * pad,) + line.shape[1:])
    ext[pad:pad + n] = line
    rolled = np.stack([np.roll(ext, o, axis=0) for o in op.offsets])
    out = np.einsum("oljmn,oimn->ilj", op.matrices, rolled)
    outflow = float(np.sum(out[:pad, 0, 0]) + np.sum(out[pad + n:, 0, 0]))
    return out[pad:pad + n], outflow


def shift_1d(line, delta, table: ShiftTable, boundary=PERIODIC):
    """Translate-and-project one line of cells; see :func:`shift_operator`."""
    return apply_shift(line, shift_operator(delta, table), boundary)
