"""Time series, error norms, decay-rate fits, recurrence detection and order studies."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .legendre import gauss_rule
from .projection import DGField, evaluate_grid

SERIES_COLUMNS = ("time", "electric_energy", "mass", "l2_norm", "lost_mass")
REPORT_COLUMNS = ("resolution", "h", "error", "observed_order")


class TimeSeries:
    """Diagnostics rows in time order."""

    def __init__(self, rows=None):
        self._rows = []
        for row in rows or []:
            self.append(*row)

    def append(self, time, electric_energy, mass, l2_norm, lost_mass):
        row = (float(time), float(electric_energy), float(mass), float(l2_norm), float(lost_mass))
        if not all(math.isfinite(v) for v in row):
            raise ValueError(f"non-finite diagnostics row {row}")
        if self._rows and row[0] <= self._rows[-1][0]:
            raise ValueError("times must be strictly increasing")
        self._rows.append(row)

    def __len__(self):
        return len(self._rows)

    def column(self, name):
        k = SERIES_COLUMNS.index(name)
        return np.array([r[k] for r in self._rows])

    @property
    def times(self):
        return self.column("time")

    @property
    def energy(self):
        return self.column("electric_energy")

    def rows(self):
        return list(self._rows)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(SERIES_COLUMNS)
            for row in self._rows:
                writer.writerow([f"{v:.17g}" for v in row])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != SERIES_COLUMNS:
                raise ValueError(f"{path}: unexpected header {header}")
            return cls([tuple(float(v) for v in row) for row in reader])


@dataclass
class ConvergenceReport:
    resolutions: List[float]
    h: List[float]
    errors: List[float]
    slope: float = field(init=False)
    orders: List[float] = field(init=False)

    def __post_init__(self):
        if any(not e > 0 for e in self.errors):
            raise ValueError("errors must be positive to fit an order")
        logh = np.log(np.asarray(self.h, dtype=float))
        loge = np.log(np.asarray(self.errors, dtype=float))
        self.slope = float(np.polyfit(logh, loge, 1)[0]) if len(logh) > 1 else float("nan")
        self.orders = [float("nan")] + [
            float((loge[k] - loge[k - 1]) / (logh[k] - logh[k - 1])) for k in range(1, len(logh))]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(REPORT_COLUMNS)
            for n, h, e, p in zip(self.resolutions, self.h, self.errors, self.orders):
                writer.writerow([f"{n:.17g}", f"{h:.17g}", f"{e:.17g}", "" if math.isnan(p) else f"{p:.17g}"])


def _union_breaks(a, b, scale):
    pts = np.union1d(a, b)
    keep = np.concatenate(([True], np.diff(pts) > 1e-12 * scale))
    return pts[keep]


def _union_points(edges_a, edges_b, nodes, scale):
    breaks = _union_breaks(edges_a, edges_b, scale)
    lo, hi = breaks[:-1], breaks[1:]
    rule = gauss_rule(nodes)
    pts = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * rule.nodes[None, :]
    wts = 0.5 * (hi - lo)[:, None] * rule.weights[None, :]
    return pts.ravel(), wts.ravel()


def l2_error_vs_reference(f: DGField, ref: DGField):
    """L2 distance of two fields on the same domain, integrated on the union grid.

    Both fields are polynomial on every union cell, so the Gauss rule with
    ``max degree + 2`` nodes per direction is exact.
    """
    ga, gb = f.grid, ref.grid
    if not ga.same_domain(gb):
        raise ValueError("fields live on different domains")
    nodes = max(ga.degree, gb.degree) + 2
    xs, wx = _union_points(ga.x_edges(), gb.x_edges(), nodes, ga.length)
    vs, wv = _union_points(ga.v_edges(), gb.v_edges(), nodes, ga.v_max)
    diff = evaluate_grid(f, xs, vs) - evaluate_grid(ref, xs, vs)
    return float(np.sqrt(np.einsum("a,ab,b->", wx, diff * diff, wv)))


def l2_error_vs_function(f: DGField, g, nodes=None):
    """L2 distance between ``f`` and the function ``g(x, v)`` by per-cell Gauss quadrature."""
    grid = f.grid
    rule = gauss_rule(nodes or grid.degree + 8)
    xs = (grid.x_centers()[:, None] + 0.5 * grid.hx * rule.nodes[None, :]).ravel()
    vs = (grid.v_centers()[:, None] + 0.5 * grid.hv * rule.nodes[None, :]).ravel()
    wx = np.tile(0.5 * grid.hx * rule.weights, grid.nx)
    wv = np.tile(0.5 * grid.hv * rule.weights, grid.nv)
    diff = evaluate_grid(f, xs, vs) - np.asarray(g(xs[:, None], vs[None, :]), dtype=float)
    return float(np.sqrt(np.einsum("a,ab,b->", wx, diff * diff, wv)))


def local_maxima(values):
    """Indices of interior samples that are not smaller than their neighbours."""
    v = np.asarray(values, dtype=float)
    if len(v) < 3:
        return np.array([], dtype=int)
    mid = v[1:-1]
    return np.nonzero((mid >= v[:-2]) & (mid >= v[2:]))[0] + 1


def _refine_peak(t, y, k):
    # vertex of the parabola through three neighbouring samples
    t0, t1, t2 = t[k - 1], t[k], t[k + 1]
    y0, y1, y2 = y[k - 1], y[k], y[k + 1]
    denom = (t0 - t1) * (t0 - t2) * (t1 - t2)
    a = (t2 * (y1 - y0) + t1 * (y0 - y2) + t0 * (y2 - y1)) / denom
    b = (t2 * t2 * (y0 - y1) + t1 * t1 * (y2 - y0) + t0 * t0 * (y1 - y2)) / denom
    if a >= 0:
        return t1, y1
    tv = -b / (2 * a)
    if not t0 <= tv <= t2:
        return t1, y1
    c = y1 - a * t1 * t1 - b * t1
    return tv, a * tv * tv + b * tv + c


def energy_peaks(series: TimeSeries, window=None, refine=True):
    """Local maxima ``(t, E)`` of the electric energy, optionally restricted to a window."""
    t, e = series.times, series.energy
    if np.any(e <= 0):
        raise ValueError("energies must be positive")
    loge = np.log(e)
    peaks = []
    for k in local_maxima(e):
        if window is not None and not window[0] <= t[k] <= window[1]:
            continue
        tk, yk = _refine_peak(t, loge, k) if refine else (t[k], loge[k])
        peaks.append((tk, math.exp(yk)))
    return peaks


def fit_decay_rate(series: TimeSeries, window, refine=True):
    """gamma from a least-squares line through log-energy maxima: E ~ exp(-2 gamma t)."""
    t, e = series.times, series.energy
    inside = (t >= window[0]) & (t <= window[1])
    if inside.sum() >= 2 and np.all(e[inside] > 0) and np.ptp(e[inside]) <= 1e-14 * np.max(e[inside]):
        return 0.0
    peaks = energy_peaks(series, window, refine)
    if len(peaks) < 3:
        raise ValueError(f"only {len(peaks)} energy maxima in window {window}; need 3")
    tp, ep = np.array(peaks).T
    slope = np.polyfit(tp, np.log(ep), 1)[0]
    return float(-0.5 * slope)


def detect_recurrence(series: TimeSeries, threshold=0.1) -> Optional[float]:
    """Gap between the initial energy maximum and the first later maximum above ``threshold`` of it."""
    t, e = series.times, series.energy
    if len(e) < 3 or np.any(e <= 0):
        return None
    maxima = local_maxima(e)
    if e[0] >= e[1]:
        start = 0
    elif len(maxima):
        start = int(maxima[0])
    else:
        return None
    level = threshold * e[start]
    below = np.nonzero(e[start:] < level)[0]
    if not len(below):
        return None
    # the candidate must come after the initial peak has decayed below the threshold
    first_dip = start + int(below[0])
    for k in maxima:
        if k > first_dip and e[k] > level:
            t_peak, _ = _refine_peak(t, np.log(e), k)
            return float(t_peak - t[start])
    return None


def convergence_study(problem, degree, resolutions, tau, T, reference=None,
                      ref_resolution=None, ref_degree=2, ref_tau=None, workers=1):
    """Spatial order study: run at each resolution and compare with a fine reference run.

    With ``T == 0`` this reduces to the projection error of the initial
    condition. ``reference`` may be a precomputed reference field.
    """
    from .projection import project
    from .splitting import run

    resolutions = list(resolutions)
    if any(b <= a for a, b in zip(resolutions, resolutions[1:])):
        raise ValueError("resolutions must be strictly increasing")
    if reference is None:
        ref_resolution = ref_resolution or 2 * resolutions[-1]
        if ref_resolution < 2 * resolutions[-1]:
            raise ValueError("reference resolution must be at least twice the finest tested one")
        ref_grid = problem.grid(ref_resolution, ref_resolution, ref_degree)
        if T == 0:
            reference = project(problem.initial, ref_grid)
        else:
            _, ref_state = run(problem, ref_grid, ref_tau or tau, T, workers=workers)
            reference = ref_state.f
    errors, hs = [], []
    for n in resolutions:
        grid = problem.grid(n, n, degree)
        if T == 0:
            f = project(problem.initial, grid)
        else:
            _, state = run(problem, grid, tau, T, workers=workers)
            f = state.f
        errors.append(l2_error_vs_reference(f, reference))
        hs.append(grid.hx)
    return ConvergenceReport(resolutions, hs, errors)


def time_convergence_study(problem, grid, taus, T, ref_tau, workers=1):
    """Temporal order study on a fixed grid against a small-step self-reference."""
    from .splitting import run

    _, ref_state = run(problem, grid, ref_tau, T, workers=workers)
    errors = []
    for tau in taus:
        _, state = run(problem, grid, tau, T, workers=workers)
        errors.append(l2_error_vs_reference(state.f, ref_state.f))
    return ConvergenceReport(list(taus), list(taus), errors)
