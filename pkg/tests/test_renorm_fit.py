from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from moyalrg import (DivergenceClass, FitError, GraphClass, ModelParams, ScanSeries, finite_a_shift,
                     fit_ir_structure, fit_uv_divergence, tadpole_nonplanar)
from moyalrg.amplitude import CutoffSpec
from moyalrg.renorm_fit import (ClassificationTable, ExtrapolationError, TableRow, measure_class,
                                external_momenta)

K = np.logspace(-3, -1, 20)
LAM = np.logspace(1, 3, 10)


def ir_series(c, c_log, d0, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    v = c / K ** 2 + c_log * np.log(K ** 2) + d0
    err = noise * np.abs(v)
    return ScanSeries("k_ir", K, v + err * rng.standard_normal(len(K)), err)


def test_ir_fit_recovers_synthetic_coefficients():
    fit = fit_ir_structure(ir_series(2.5, -0.3, 1.0))
    for name, val in zip(("c", "c_log", "d0"), (2.5, -0.3, 1.0)):
        assert fit.coefficients[name] == pytest.approx(val, rel=1e-2)
    assert fit.r_squared > 0.999


@given(st.floats(0.5, 5), st.floats(-1, 1), st.floats(-2, 2), st.integers(0, 1000))
def test_ir_fit_round_trip(c, c_log, d0, seed):
    """Refitting data synthesized from a fit reproduces it within its standard errors."""
    first = fit_ir_structure(ir_series(c, c_log, d0, noise=1e-4, seed=seed))
    co = first.coefficients
    err = 1e-4 * np.abs(co["c"] / K ** 2 + co["c_log"] * np.log(K ** 2) + co["d0"])
    s = ScanSeries("k_ir", K, co["c"] / K ** 2 + co["c_log"] * np.log(K ** 2) + co["d0"], err)
    second = fit_ir_structure(s)
    for name in co:
        assert abs(second.coefficients[name] - co[name]) <= max(first.stderr[name], 1e-12 * abs(co[name])) + 1e-12


def test_ir_fit_needs_two_decades():
    s = ScanSeries("k_ir", np.logspace(-2, -1, 10), np.ones(10), np.zeros(10))
    with pytest.raises(FitError):
        fit_ir_structure(s)


def test_ir_fit_rejects_uv_axis():
    with pytest.raises(FitError):
        fit_ir_structure(ScanSeries("lambda_uv", LAM, LAM ** 2, np.zeros(10)))


@pytest.mark.parametrize("rho", [2.0, 1.0, 0.5])
def test_power_law_selected(rho):
    fit = fit_uv_divergence(ScanSeries("lambda_uv", LAM, 3.0 * LAM ** rho, np.zeros(10)))
    assert fit.outcome == "power_law"
    assert fit.coefficients["rho"] == pytest.approx(rho, abs=1e-6)


def test_log_law_selected():
    fit = fit_uv_divergence(ScanSeries("lambda_uv", LAM, 2.0 * np.log(LAM) + 1.0, np.zeros(10)))
    assert fit.outcome == "log_law"
    assert fit.coefficients["slope"] == pytest.approx(2.0, rel=1e-6)


def test_bounded_selected():
    fit = fit_uv_divergence(ScanSeries("lambda_uv", LAM, 5.0 - 1.0 / LAM ** 2, np.zeros(10)))
    assert fit.outcome == "bounded"


def test_finite_shift_synthetic():
    v = (3.0 + 0.1 * K) / K ** 2
    fs = finite_a_shift(ScanSeries("k_ir", K, v, np.zeros_like(K), ModelParams(a=1.0)))
    assert fs.value == pytest.approx(3.0, rel=1e-2)
    assert fs.tail_variation < 0.1


def test_finite_shift_rejects_oscillating_tail():
    v = (3.0 + 0.5 * np.sin(40 * np.log(K))) / K ** 2
    with pytest.raises(ExtrapolationError):
        finite_a_shift(ScanSeries("k_ir", K, v, np.zeros_like(K)), n_last=6)


def test_finite_shift_needs_a():
    with pytest.raises(FitError):
        finite_a_shift(ScanSeries("k_ir", K, 1 / K ** 2, np.zeros_like(K), ModelParams(a=0.0)))


@pytest.mark.parametrize("x, v, e", [
    (np.arange(5.0), np.ones(5), np.zeros(5)),                         # too few points
    (np.r_[np.arange(8.0), 3.0], np.ones(9), np.zeros(9)),             # not monotone
    (np.arange(8.0), np.ones(8), -np.ones(8)),                         # negative errors
    (np.arange(8.0), np.full(8, np.nan), np.zeros(8)),                 # non-finite values
])
def test_scan_series_invariants(x, v, e):
    with pytest.raises(FitError):
        ScanSeries("k_ir", x, v, e)


def test_scan_series_axis():
    with pytest.raises(FitError):
        ScanSeries("time", np.arange(8.0), np.ones(8), np.zeros(8))


def test_table_matrix_and_mismatch():
    rows = (
        TableRow("a", GraphClass.PLANAR_IRREGULAR, 2, DivergenceClass.FINITE_RENORMALIZATION,
                 DivergenceClass.FINITE_RENORMALIZATION, ""),
        TableRow("b", GraphClass.NONPLANAR, 4, DivergenceClass.CONVERGENT,
                 DivergenceClass.RENORMALIZABLE_DIVERGENT, ""),
        TableRow("c", GraphClass.NONPLANAR, 6, DivergenceClass.CONVERGENT, None, "no evaluator"),
    )
    t = ClassificationTable(rows)
    assert [r.graph for r in t.mismatches] == ["b"]
    assert t.matrix() == {("planar_irregular", 2): "finite ren.", ("nonplanar", 4): "ren."}
    assert "MISMATCH" in t.render() and "unmeasured" in t.render()


def test_external_momenta_conserve():
    for N in (2, 4):
        assert np.allclose(external_momenta(N, 0.7).sum(axis=0), 0.0)
    with pytest.raises(ValueError):
        external_momenta(6, 1.0)


def test_ir_coefficient_stable_under_window_halving():
    params = ModelParams(a=0.0, mu2=1.0)
    ks = np.logspace(-3, -1, 20)
    vals = [tadpole_nonplanar(k, params, CutoffSpec(0.0, 1 / k ** 2)) for k in ks]
    s = ScanSeries.from_samples("k_ir", ks, vals, params)
    full = fit_ir_structure(s).coefficients["c"]
    half = fit_ir_structure(s, k_max=0.05, min_decades=1.5).coefficients["c"]
    assert half == pytest.approx(full, rel=0.05)


def test_measure_class_on_tadpole():
    params = ModelParams()
    cls, evidence = measure_class("tadpole_np", lambda k, cut: tadpole_nonplanar(k, params, cut), params)
    assert cls is DivergenceClass.FINITE_RENORMALIZATION and "UV bounded" in evidence
