"""Charge density and the self-consistent electric field in one space dimension."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg

from .legendre import legendre_vandermonde
from .projection import DGField

NEUTRALITY_RTOL = 1e-8


class NeutralityError(ValueError):
    """Raised when the charge density does not integrate to the background."""


@dataclass(frozen=True)
class PiecewisePoly1D:
    """Per-cell Legendre series on a uniform periodic grid starting at ``left``."""

    coeffs: np.ndarray = field(repr=False)
    width: float
    left: float = 0.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 2:
            raise ValueError("coeffs must have shape (cells, degree + 1)")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self):
        return self.coeffs.shape[0]

    @property
    def degree(self):
        return self.coeffs.shape[1] - 1

    @property
    def length(self):
        return self.n * self.width

    def integral(self):
        return self.width * float(np.sum(self.coeffs[:, 0]))

    def mean(self):
        return self.integral() / self.length

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        s = (x - self.left) / self.width
        i = np.clip(np.floor(s).astype(int), 0, self.n - 1)
        xi = 2.0 * (s - i) - 1.0
        V = legendre_vandermonde(self.degree, xi)
        out = np.einsum("...k,k...->...", self.coeffs[i], V)
        return out if out.ndim else float(out)


def density(f: DGField) -> PiecewisePoly1D:
    """rho(x) = int f dv; only the constant-in-v basis functions contribute."""
    g = f.grid
    return PiecewisePoly1D(g.hv * f.coeffs[:, :, :, 0].sum(axis=1), g.hx, g.x_left)


def electric_field(rho: PiecewisePoly1D, background=1.0, extra_charge=0.0) -> PiecewisePoly1D:
    """Zero-mean E with E' = rho - background, by per-cell antidifferentiation.

    The net charge must vanish to within ``1e-8 * L`` plus ``extra_charge``
    (mass already known to have left through the velocity boundary); the
    residual is removed as a uniform background before integrating.
    The cell constants are chained left to right, which keeps E continuous;
    this prefix pass is the one sequential part of a time step.
    """
    h = rho.width
    source = np.array(rho.coeffs)
    source[:, 0] -= background
    net = h * float(np.sum(source[:, 0]))
    tol = NEUTRALITY_RTOL * rho.length + abs(extra_charge)
    if abs(net) > tol:
        raise NeutralityError(f"net charge {net:.3e} exceeds tolerance {tol:.3e}")
    # the tolerated residual is spread uniformly so that E stays periodic
    source[:, 0] -= net / rho.length
    # antiderivative in the reference coordinate, vanishing at xi = -1
    anti = np.zeros((rho.n, rho.degree + 2))
    # legint drops the extra column for an all-zero single-cell source, hence the copy
    integ = npleg.legint(source, m=1, lbnd=-1, scl=0.5 * h, axis=1)
    anti[:, : integ.shape[1]] = integ
    rise = anti.sum(axis=1)  # value at xi = +1
    anti[:, 0] += np.concatenate(([0.0], np.cumsum(rise[:-1])))
    anti[:, 0] -= anti[:, 0].mean()
    return PiecewisePoly1D(anti, h, rho.left)


def electric_energy(E: PiecewisePoly1D):
    """int E^2 dx, exact from the Legendre coefficients."""
    w = 1.0 / (2 * np.arange(E.degree + 1) + 1)
    return E.width * float(np.einsum("ik,k->", E.coeffs ** 2, w))
