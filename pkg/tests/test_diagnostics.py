import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from vlasovdg.diagnostics import (
    ConvergenceReport,
    TimeSeries,
    convergence_study,
    detect_recurrence,
    energy_peaks,
    fit_decay_rate,
    l2_error_vs_function,
    l2_error_vs_reference,
    local_maxima,
    time_convergence_study,
)
from vlasovdg.problems import advection_recurrence, landau
from vlasovdg.projection import DGField, GridSpec, project
from vlasovdg.splitting import run


def series_from(t, e):
    return TimeSeries([(ti, ei, 1.0, 1.0, 0.0) for ti, ei in zip(t, e)])


def test_series_validation():
    s = TimeSeries()
    s.append(0.0, 1.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        s.append(0.0, 1.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        s.append(1.0, np.nan, 1.0, 1.0, 0.0)
    assert len(s) == 1


def test_series_csv_roundtrip(tmp_path, rng):
    rows = [(0.1 * k, *rng.random(3), rng.normal() * 1e-9) for k in range(20)]
    s = TimeSeries(rows)
    path = tmp_path / "s.csv"
    s.to_csv(path)
    assert path.read_text().splitlines()[0] == "time,electric_energy,mass,l2_norm,lost_mass"
    back = TimeSeries.from_csv(path)
    assert back.rows() == s.rows()
    s.to_csv(tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()


def test_report():
    r = ConvergenceReport([8, 16, 32], [0.5, 0.25, 0.125], [4e-2, 1e-2, 2.5e-3])
    assert r.slope == pytest.approx(2.0)
    assert math.isnan(r.orders[0]) and r.orders[1:] == pytest.approx([2.0, 2.0])
    with pytest.raises(ValueError):
        ConvergenceReport([8, 16], [0.5, 0.25], [1e-2, 0.0])


def test_report_csv(tmp_path):
    r = ConvergenceReport([8, 16], [0.5, 0.25], [4e-2, 1e-2])
    r.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "resolution,h,error,observed_order"
    assert lines[1].endswith(",") and float(lines[2].split(",")[-1]) == pytest.approx(2.0)


def test_error_vs_reference_examples(rng):
    g = GridSpec(4 * np.pi, 6.0, 4, 6, 2)
    f = DGField(g, rng.normal(size=g.shape))
    assert l2_error_vs_reference(f, f) == 0.0
    fine = GridSpec(4 * np.pi, 6.0, 8, 12, 2)
    ref = project(lambda x, v: 0 * x * v, fine)
    const = project(lambda x, v: 0.3 + 0 * x * v, g)
    assert l2_error_vs_reference(const, ref) == pytest.approx(0.3 * math.sqrt(48 * np.pi), rel=1e-13)
    with pytest.raises(ValueError):
        l2_error_vs_reference(f, DGField.zeros(GridSpec(1.0, 6.0, 4, 6, 2)))


def test_error_vs_function_matches_reference_form(rng):
    g = GridSpec(2.0, 1.0, 5, 5, 1, x_left=-1.0)
    f = DGField(g, rng.normal(size=g.shape))
    zero = DGField.zeros(GridSpec(2.0, 1.0, 10, 10, 2, x_left=-1.0))
    assert l2_error_vs_function(f, lambda x, v: 0 * x * v) == pytest.approx(
        l2_error_vs_reference(f, zero), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(0, 2))
def test_error_symmetric_and_triangle(seed, degree):
    rng = np.random.default_rng(seed)
    g = GridSpec(3.0, 1.0, 3, 4, degree)
    a, b, c = (DGField(g, rng.normal(size=g.shape)) for _ in range(3))
    ab, ba = l2_error_vs_reference(a, b), l2_error_vs_reference(b, a)
    assert abs(ab - ba) <= 1e-12 * ab
    assert ab <= l2_error_vs_reference(a, c) + l2_error_vs_reference(c, b) + 1e-12


@pytest.mark.parametrize("degree", [0, 1, 2])
def test_coarse_vs_fine_projection_order(degree):
    fn = landau(0.5).initial
    fine = project(fn, GridSpec(4 * np.pi, 6.0, 128, 128, 2))
    errs = [l2_error_vs_reference(project(fn, GridSpec(4 * np.pi, 6.0, n, n, degree)), fine)
            for n in (16, 32)]
    assert math.log2(errs[0] / errs[1]) == pytest.approx(degree + 1, abs=0.3)


def test_local_maxima():
    assert list(local_maxima([0, 2, 1, 3, 3, 0])) == [1, 3, 4]
    assert list(local_maxima([1, 2])) == []


@pytest.mark.parametrize("gamma", [0.1533, 0.05, 0.3])
def test_decay_fit_synthetic(gamma):
    t = np.arange(0, 40, 0.05)
    e = np.exp(-2 * gamma * t) * (1 + 0.5 * np.cos(1.4 * t)) ** 2
    assert fit_decay_rate(series_from(t, e), (2, 25)) == pytest.approx(gamma, abs=1e-3)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 0.4), st.floats(0.8, 3.0), st.floats(0.1, 0.9))
def test_decay_fit_recovers_planted_rate(gamma, omega, depth):
    # the oscillation must be strong enough to produce maxima at all
    assume(depth * omega / math.sqrt(1 - depth**2) > 1.2 * gamma)
    t = np.arange(0, 30, 0.02)
    e = np.exp(-2 * gamma * t) * (1 + depth * np.cos(omega * t)) ** 2 + 1e-300
    assert fit_decay_rate(series_from(t, e), (1, 28)) == pytest.approx(gamma, abs=1e-3)


def test_decay_fit_edge_cases():
    t = np.arange(0, 10, 0.1)
    assert fit_decay_rate(series_from(t, np.full_like(t, 2.0)), (0, 10)) == 0.0
    with pytest.raises(ValueError):
        fit_decay_rate(series_from(t, np.exp(-t)), (0, 10))


def test_energy_peaks_window():
    t = np.arange(0, 20, 0.01)
    e = 2 + np.cos(t)
    peaks = energy_peaks(series_from(t, e), (1, 20))
    assert [p[0] for p in peaks] == pytest.approx([2 * np.pi, 4 * np.pi, 6 * np.pi], abs=1e-4)


def test_recurrence_synthetic():
    t = np.arange(0, 60, 0.05)
    e = np.exp(-0.25 * t**2) + 0.3 * np.exp(-0.25 * (t - 31.4) ** 2) + 1e-12
    assert detect_recurrence(series_from(t, e)) == pytest.approx(31.4, abs=0.05)
    # pure decay: nothing comes back
    assert detect_recurrence(series_from(t, np.exp(-0.25 * t**2) + 1e-12)) is None
    # small bump below the threshold is ignored
    e = np.exp(-0.25 * t**2) + 0.05 * np.exp(-0.25 * (t - 31.4) ** 2) + 1e-12
    assert detect_recurrence(series_from(t, e)) is None


def test_damped_recurrence_for_linear_elements():
    prob = advection_recurrence()
    found = {}
    for degree in (0, 1):
        series, _ = run(prob, prob.grid(32, 33, degree), 0.1, 45.0)
        period = detect_recurrence(series, threshold=0.02)
        assert period == pytest.approx(4 * np.pi / (12 / 33), abs=0.3)
        k = np.argmin(np.abs(series.times - period))
        found[degree] = (series.energy[k - 3:k + 4].max() / series.energy[0],
                         detect_recurrence(series))
    # linear elements still recur, but the peak is damped below the default 10% level
    assert found[1][0] < 0.5 * found[0][0]
    assert found[0][1] is not None and found[1][1] is None


def test_projection_only_study():
    for degree in (0, 1, 2):
        report = convergence_study(landau(0.5), degree, [16, 32, 64], tau=0.1, T=0.0)
        assert report.slope == pytest.approx(degree + 1, abs=0.2)


def test_study_validates_inputs():
    with pytest.raises(ValueError):
        convergence_study(landau(0.5), 1, [32, 16], 0.1, 0.0)
    with pytest.raises(ValueError):
        convergence_study(landau(0.5), 1, [16, 32], 0.1, 0.0, ref_resolution=48)


def test_time_study_small():
    prob = landau(0.01)
    report = time_convergence_study(prob, prob.grid(16, 16, 1), [0.4, 0.2], 0.8, 0.05)
    assert report.resolutions == [0.4, 0.2]
    assert report.slope == pytest.approx(2.0, abs=0.4)
