"""Signal evaluation, translation flow, and the compact-open metric.

Oracle values in this file were computed independently (dense-grid scans at
1e5 samples/unit and closed forms) and frozen; grid values use the default
64 samples/unit.
"""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from recurflow import (AnalyticSignal, CompactOpenMetricParams, CoverageError,
                       SampledPath, TimeGrid, compact_open_distance, evaluate,
                       seminorm_dn, translate, window_grid)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def test_constant_evaluation():
    s = AnalyticSignal.constant(2.5)
    assert s(0.0) == 2.5
    assert np.all(evaluate(s, np.linspace(-3, 3, 7)) == 2.5)


def test_periodic_evaluation_matches_closed_form():
    s = AnalyticSignal.periodic(2.0, 3.0, 0.25)
    t = np.linspace(-5, 5, 101)
    np.testing.assert_allclose(evaluate(s, t), 2.0 * np.sin(3.0 * t + 0.25),
                               rtol=0, atol=1e-15)


def test_quasi_periodic_evaluation_scalar_and_array_agree():
    s = AnalyticSignal.quasi_periodic([0.5, 0.5], [1.0, math.sqrt(2)])
    t = np.linspace(-10, 10, 257)
    arr = evaluate(s, t)
    scal = np.array([s(float(x)) for x in t])
    np.testing.assert_allclose(arr, scal, rtol=0, atol=1e-15)


def test_poisson_example_denominator_strictly_positive():
    # sin t and sin(pi t) can never both be -1 (that would make pi rational),
    # so the signal is finite everywhere -- but approaches huge values.
    s = AnalyticSignal.poisson_example()
    t = np.linspace(0, 2000, 400001)
    v = evaluate(s, t)
    assert np.all(np.isfinite(v))
    assert np.all(v > 0)
    assert v.max() > 1e3  # the near-resonances are genuinely deep


def test_poisson_example_value_at_zero():
    s = AnalyticSignal.poisson_example()
    assert s(0.0) == pytest.approx(0.5, abs=1e-15)


def test_rationally_dependent_frequencies_warn():
    with pytest.warns(UserWarning, match="effectively periodic"):
        AnalyticSignal.quasi_periodic([1.0, 1.0], [1.0, 1.5])


def test_quasi_periodic_irrational_ratio_does_not_warn():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        AnalyticSignal.quasi_periodic([1.0, 1.0], [1.0, math.sqrt(2)])


def test_signal_validation_errors():
    with pytest.raises(ValueError):
        AnalyticSignal("nonsense")
    with pytest.raises(ValueError):
        AnalyticSignal("periodic", (1.0, 2.0), (1.0, 2.0))  # two terms
    with pytest.raises(ValueError):
        AnalyticSignal("quasi_periodic", (1.0,), (0.0,))  # zero frequency
    with pytest.raises(ValueError):
        AnalyticSignal("quasi_periodic", (1.0, 1.0), (1.0,))  # length mismatch


# ---------------------------------------------------------------------------
# translation flow
# ---------------------------------------------------------------------------

def test_translate_evaluates_shifted():
    s = AnalyticSignal.quasi_periodic([1.0, 0.5], [1.0, math.sqrt(2)])
    t = np.linspace(-5, 5, 101)
    for tau in (0.0, 0.3, -1.7, 44.0):
        np.testing.assert_allclose(evaluate(translate(s, tau), t),
                                   evaluate(s, t + tau), rtol=0, atol=1e-12)


def test_translate_group_law_periodic_kinds():
    s = AnalyticSignal.quasi_periodic([1.0, 0.5], [1.0, math.sqrt(2)])
    a, b = 1.25, -0.75
    lhs = translate(translate(s, a), b)
    rhs = translate(s, a + b)
    t = np.linspace(-3, 3, 61)
    np.testing.assert_allclose(evaluate(lhs, t), evaluate(rhs, t), rtol=0, atol=1e-12)
    # the representation stays in the same kind (phases fold, no growth)
    assert lhs.kind == s.kind
    assert lhs.base_shift == 0.0


def test_translate_poisson_accumulates_base_shift():
    s = AnalyticSignal.poisson_example()
    s2 = translate(translate(s, 10.0), 34.0)
    assert s2.kind == "shifted"
    assert s2.base_shift == pytest.approx(44.0, abs=0)
    t = np.linspace(-2, 2, 41)
    np.testing.assert_allclose(evaluate(s2, t), evaluate(s, t + 44.0),
                               rtol=1e-12, atol=0)


def test_translate_zero_is_identity():
    s = AnalyticSignal.poisson_example()
    assert translate(s, 0.0) is s


# ---------------------------------------------------------------------------
# compact-open metric
# ---------------------------------------------------------------------------

def test_distance_between_constants_closed_form():
    # d_n = 1 for all n, so the series is sum 2^-n * 1/2 = (1/2)(1 - 2^-n_max).
    zero = AnalyticSignal.constant(0.0)
    one = AnalyticSignal.constant(1.0)
    d = compact_open_distance(zero, one)
    assert d == pytest.approx(0.5 * (1.0 - 2.0 ** -20), abs=1e-15)
    # frozen value
    assert d == pytest.approx(0.4999995231628418, abs=1e-16)


def test_distance_truncation_level():
    zero = AnalyticSignal.constant(0.0)
    one = AnalyticSignal.constant(1.0)
    for n_max in (1, 5, 10):
        p = CompactOpenMetricParams(n_max=n_max)
        assert compact_open_distance(zero, one, p) == pytest.approx(
            0.5 * (1.0 - 2.0 ** -n_max), abs=1e-15)
        assert p.truncation_bound == 2.0 ** -n_max


def test_seminorm_frozen_oracle_sin_translate():
    # sup over [-3,3] of |sin(t+0.1) - sin t|; the analytic sup is 2 sin 0.05,
    # attained inside the window.  Dense-grid oracle (1e5/unit):
    # 0.099958338521364987; the 64/unit grid value is slightly below.
    s = AnalyticSignal.periodic(1.0, 1.0)
    s2 = translate(s, 0.1)
    d3 = seminorm_dn(s, s2, 3, samples_per_unit=64)
    assert d3 == pytest.approx(0.09995785046392895, abs=1e-15)  # frozen grid value
    assert d3 <= 2.0 * math.sin(0.05) + 1e-15
    assert d3 == pytest.approx(2.0 * math.sin(0.05), abs=5e-6)  # grid resolution


def test_seminorm_monotone_in_level():
    s = AnalyticSignal.quasi_periodic([1.0, 1.0], [1.0, math.sqrt(2)])
    s2 = translate(s, 0.35)
    prev = 0.0
    for n in range(1, 8):
        d = seminorm_dn(s, s2, n)
        assert d >= prev - 1e-15
        prev = d


def test_distance_poisson_translate_44_frozen():
    # the headline return time of the poisson example: at truncation level 5
    # (window T = 5) the distance to the 44-translate is well under 0.1
    p = AnalyticSignal.poisson_example()
    d = compact_open_distance(p, translate(p, 44.0),
                              CompactOpenMetricParams(n_max=5, samples_per_unit=64))
    assert d == pytest.approx(0.0636676967594956, abs=1e-15)
    assert d < 0.1


def test_distance_bounded_below_one():
    p = AnalyticSignal.poisson_example()
    q = AnalyticSignal.constant(1e9)
    d = compact_open_distance(p, q)
    assert 0.0 < d < 1.0  # each summand is 2^-n * dn/(1+dn) < 2^-n


_small = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
_freq = st.floats(min_value=0.1, max_value=4.0, allow_nan=False, allow_infinity=False)


def _qp(a1, a2, w1, w2, p1, p2):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # rational-ratio warnings are irrelevant here
        return AnalyticSignal.quasi_periodic([a1, a2], [w1, w2], [p1, p2])


@settings(max_examples=60, deadline=None)
@given(_small, _small, _freq, _freq, _small, _small)
def test_metric_identity_and_symmetry(a1, a2, w1, w2, p1, p2):
    f = _qp(a1, a2, w1, w2, p1, p2)
    g = _qp(a2, a1, w2, w1, p2, p1)
    params = CompactOpenMetricParams(n_max=6, samples_per_unit=16)
    assert compact_open_distance(f, f, params) == 0.0
    assert compact_open_distance(f, g, params) == compact_open_distance(g, f, params)


@settings(max_examples=40, deadline=None)
@given(_small, _small, _small, _freq, _freq, _freq, _small, _small, _small)
def test_metric_triangle_inequality(a1, a2, a3, w1, w2, w3, p1, p2, p3):
    f = _qp(a1, a2, w1, w2, p1, p2)
    g = _qp(a2, a3, w2, w3, p2, p3)
    h = _qp(a3, a1, w3, w1, p3, p1)
    params = CompactOpenMetricParams(n_max=6, samples_per_unit=16)
    dfh = compact_open_distance(f, h, params)
    dfg = compact_open_distance(f, g, params)
    dgh = compact_open_distance(g, h, params)
    assert dfh <= dfg + dgh + 1e-12


# ---------------------------------------------------------------------------
# sampled paths
# ---------------------------------------------------------------------------

def test_sampled_path_agrees_with_analytic_on_grid():
    grid = TimeGrid(t0=-8.0, dt=1.0 / 64, count=16 * 64 + 1)
    s = AnalyticSignal.periodic(1.0, 1.0)
    path = SampledPath(grid, evaluate(s, grid.times()))
    d = compact_open_distance(path, s, CompactOpenMetricParams(n_max=8, samples_per_unit=64))
    assert d < 1e-12


def test_sampled_path_coverage_error():
    grid = TimeGrid(t0=0.0, dt=0.1, count=11)  # covers [0, 1]
    path = SampledPath(grid, np.zeros(11))
    with pytest.raises(CoverageError):
        path.values_on(np.array([-0.5, 0.5]))
    assert path.covers(0.0, 1.0)
    assert not path.covers(-1.0, 1.0)


def test_sampled_path_rejects_nonfinite():
    grid = TimeGrid(t0=0.0, dt=0.1, count=3)
    with pytest.raises(ValueError):
        SampledPath(grid, np.array([0.0, np.nan, 1.0]))


def test_window_grid_endpoints_and_density():
    g = window_grid(5.0, 64)
    assert g.shape == (641,)
    assert g[0] == -5.0 and g[-1] == 5.0
    assert g[320] == pytest.approx(0.0, abs=1e-15)
    g2 = window_grid(2.0, 10, center=7.0)
    assert g2[0] == pytest.approx(5.0) and g2[-1] == pytest.approx(9.0)


def test_time_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(0.0, -0.1, 5)
    with pytest.raises(ValueError):
        TimeGrid(0.0, 0.1, 0)
    g = TimeGrid(1.0, 0.5, 5)
    assert g.t_end == pytest.approx(3.0)
    np.testing.assert_allclose(g.times(), [1.0, 1.5, 2.0, 2.5, 3.0])
