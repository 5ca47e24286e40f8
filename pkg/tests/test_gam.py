"""Additive model: spline basis oracle, fit examples, invariants."""
import dataclasses

import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from fuma.errors import InsufficientData, RegistryMismatch, UnknownFeature
from fuma.gam import (_cr_design, _cr_penalty, fit_gam, partial_effect,
                      predict_gam, predict_matrix)


def test_basis_matches_reference_natural_spline():
    rng = np.random.default_rng(0)
    for trial in range(10):
        k = rng.integers(4, 11)
        knots = np.sort(rng.uniform(0, 10, k))
        while np.min(np.diff(knots)) < 1e-3:
            knots = np.sort(rng.uniform(0, 10, k))
        beta = rng.normal(0, 2, k)
        S, F = _cr_penalty(knots)
        cs = CubicSpline(knots, beta, bc_type="natural")
        xg = np.linspace(knots[0], knots[-1], 97)
        ours = _cr_design(xg, knots, F) @ beta
        assert np.max(np.abs(ours - cs(xg))) < 1e-9


def test_basis_extrapolates_linearly_with_boundary_slope():
    rng = np.random.default_rng(1)
    knots = np.sort(rng.uniform(0, 10, 8))
    beta = rng.normal(0, 2, 8)
    _, F = _cr_penalty(knots)
    cs = CubicSpline(knots, beta, bc_type="natural")
    xl = np.array([knots[0] - 3.0, knots[0] - 1.0])
    yl = _cr_design(xl, knots, F) @ beta
    assert abs((yl[1] - yl[0]) / 2.0 - cs(knots[0], 1)) < 1e-9
    xr = np.array([knots[-1] + 1.0, knots[-1] + 4.0])
    yr = _cr_design(xr, knots, F) @ beta
    assert abs((yr[1] - yr[0]) / 3.0 - cs(knots[-1], 1)) < 1e-9
    # and second differences vanish outside the knots
    xs = knots[-1] + np.array([1.0, 2.0, 3.0, 4.0])
    ys = _cr_design(xs, knots, F) @ beta
    assert np.max(np.abs(np.diff(ys, n=2))) < 1e-9


def test_penalty_equals_integrated_squared_curvature():
    rng = np.random.default_rng(2)
    knots = np.sort(rng.uniform(0, 5, 7))
    beta = rng.normal(0, 1, 7)
    S, _ = _cr_penalty(knots)
    cs = CubicSpline(knots, beta, bc_type="natural")
    xg = np.linspace(knots[0], knots[-1], 200001)
    integral = np.trapezoid(cs(xg, 2) ** 2, xg)
    quad = float(beta @ S @ beta)
    assert abs(quad - integral) < 1e-5 * max(1.0, abs(integral))


def _toy(seed, n=400):
    rng = np.random.default_rng(seed)
    x1 = rng.uniform(-1, 1, n)
    x2 = rng.uniform(0, 1, n)
    return rng, x1, x2


def test_constant_response_collapses_to_intercept():
    rng, x1, x2 = _toy(3)
    X = np.column_stack([x1, x2, rng.integers(0, 2, 400).astype(float)])
    names = ["x-acf1", "seasonal-strength", "nperiods"]
    model, diag = fit_gam(X, np.full(400, 3.0), feature_names=names)
    assert abs(model.intercept - 3.0) < 1e-9
    assert np.max(np.abs(model.linear_coefs)) < 1e-6
    for term in model.smooths:
        assert np.max(np.abs(term.coef)) < 1e-6
    grid = np.linspace(-1, 1, 7)
    assert np.max(np.abs(partial_effect(model, "x-acf1", grid))) < 1e-6


def test_linear_signal_recovered_by_partial_effect():
    rng, x1, x2 = _toy(4)
    y = 2.0 * x1 + rng.normal(0, 0.01, 400)
    model, _ = fit_gam(np.column_stack([x1, x2]), y,
                       feature_names=["x-acf1", "seasonal-strength"])
    grid = np.linspace(-1, 1, 101)
    eff = partial_effect(model, "x-acf1", grid)
    true = 2.0 * grid - np.mean(2.0 * x1)
    assert np.sqrt(np.mean((eff - true) ** 2)) < 0.05


def test_sine_signal_recovered_by_partial_effect():
    rng, x1, x2 = _toy(5)
    x1 = (x1 + 1) / 2  # [0, 1]
    y = np.sin(3.0 * x1) + rng.normal(0, 0.05, 400)
    model, _ = fit_gam(np.column_stack([x1, x2]), y,
                       feature_names=["seasonal-strength", "x-acf1"])
    grid = np.linspace(0, 1, 101)
    eff = partial_effect(model, "seasonal-strength", grid)
    true = np.sin(3.0 * grid) - np.mean(np.sin(3.0 * x1))
    assert np.sqrt(np.mean((eff - true) ** 2)) < 0.1


def test_huge_lambda_reduces_smooth_to_best_line():
    rng, x1, _ = _toy(6)
    y = np.sin(3.0 * x1) + rng.normal(0, 0.05, 400)
    model, _ = fit_gam(x1.reshape(-1, 1), y, feature_names=["x-acf1"],
                       fixed_lambdas={"x-acf1": 1e12})
    slope_ols, const_ols = np.polyfit(x1, y, 1)
    g = np.array([-1.0, 1.0])
    pred = predict_matrix(model, g.reshape(-1, 1))
    slope_fit = (pred[1] - pred[0]) / 2.0
    const_fit = pred.mean()
    assert abs(slope_fit - slope_ols) < 1e-4
    assert abs(const_fit - np.polyval([slope_ols, const_ols], 0.0)) < 1e-4


def test_prediction_is_additive_in_exported_terms():
    rng, x1, x2 = _toy(7)
    y = 2.0 * x1 + np.sin(3 * x2) + rng.normal(0, 0.1, 400)
    X = np.column_stack([x1, x2])
    model, _ = fit_gam(X, y, feature_names=["x-acf1", "seasonal-strength"])
    pred = predict_matrix(model, X)
    manual = np.full(400, model.intercept)
    for i, term in enumerate(model.smooths):
        col = X[:, list(model.feature_names).index(term.name)]
        manual = manual + term(col)
    assert np.max(np.abs(pred - manual)) < 1e-9
    assert abs(predict_gam(model, X[17]) - pred[17]) < 1e-12


def test_selected_lambda_beats_search_grid():
    rng, x1, _ = _toy(8)
    y = np.sin(3.0 * x1) + rng.normal(0, 0.1, 400)
    model, diag = fit_gam(x1.reshape(-1, 1), y, feature_names=["x-acf1"])
    for exponent in np.arange(-6.0, 8.1, 2.0):
        _, fixed = fit_gam(x1.reshape(-1, 1), y, feature_names=["x-acf1"],
                           fixed_lambdas={"x-acf1": 10.0 ** exponent})
        assert diag.gcv <= fixed.gcv + 1e-9


def test_fit_is_reproducible():
    rng, x1, x2 = _toy(9)
    y = 2.0 * x1 + rng.normal(0, 0.1, 400)
    X = np.column_stack([x1, x2])
    a, _ = fit_gam(X, y, feature_names=["x-acf1", "seasonal-strength"])
    b, _ = fit_gam(X, y, feature_names=["x-acf1", "seasonal-strength"])
    assert a.intercept == b.intercept
    for ta, tb in zip(a.smooths, b.smooths):
        assert np.array_equal(ta.coef, tb.coef)
        assert ta.lam == tb.lam


def test_extrapolation_is_finite_and_linear():
    rng, x1, _ = _toy(10)
    y = np.sin(3.0 * x1) + rng.normal(0, 0.1, 400)
    model, _ = fit_gam(x1.reshape(-1, 1), y, feature_names=["x-acf1"])
    far = np.array([-50.0, -49.0, 47.0, 48.0, 49.0]).reshape(-1, 1)
    pred = predict_matrix(model, far)
    assert np.all(np.isfinite(pred))
    assert abs((pred[4] - pred[3]) - (pred[3] - pred[2])) < 1e-9


def test_edf_within_basis_bounds():
    rng, x1, x2 = _toy(11)
    y = np.sin(3.0 * x1) + rng.normal(0, 0.05, 400)
    model, diag = fit_gam(np.column_stack([x1, x2]), y,
                          feature_names=["x-acf1", "seasonal-strength"])
    for term in model.smooths:
        assert 1.0 - 1e-6 <= term.edf <= len(term.coef) - 1 + 1e-6
        assert diag.edf[term.name] == term.edf


def test_degenerate_features_demoted_or_dropped():
    rng, x1, _ = _toy(12)
    three_level = rng.integers(0, 3, 400).astype(float)
    constant = np.full(400, 7.0)
    y = 2.0 * x1 + 0.5 * three_level + rng.normal(0, 0.05, 400)
    X = np.column_stack([x1, three_level, constant])
    names = ["x-acf1", "peak", "trough"]
    model, diag = fit_gam(X, y, feature_names=names)
    assert diag.demoted == ("peak",)
    assert diag.dropped == ("trough",)
    assert "peak" in model.linear_names
    assert model.smooth_names == ("x-acf1",)
    with pytest.raises(UnknownFeature):
        partial_effect(model, "peak", [0.0])
    with pytest.raises(UnknownFeature):
        partial_effect(model, "no-such-feature", [0.0])


def test_clumped_quantiles_keep_a_usable_knot_grid():
    # 70% of values sit within float rounding of zero: naive quantile knots
    # would be 1e-15 apart and the curvature penalty would overflow
    rng, x1, _ = _toy(14)
    clumped = np.where(rng.uniform(size=400) < 0.7,
                       1e-15 * rng.uniform(size=400),
                       rng.uniform(0.1, 0.6, 400))
    y = 2.0 * x1 + clumped + rng.normal(0, 0.05, 400)
    with np.errstate(over="raise", invalid="raise"):
        model, _ = fit_gam(np.column_stack([x1, clumped]), y,
                           feature_names=["x-acf1", "beta"])
    term = next(t for t in model.smooths if t.name == "beta")
    spacing = np.diff(term.knots)
    span = term.knots[-1] - term.knots[0]
    assert np.all(spacing > 1e-9 * span)
    grid = np.linspace(0.0, 0.6, 50)
    assert np.all(np.isfinite(partial_effect(model, "beta", grid)))


def test_two_tight_clusters_demote_to_linear():
    rng, x1, _ = _toy(15)
    noise = 1e-15 * rng.uniform(size=400)
    two_level = rng.integers(0, 2, 400) + noise
    y = 2.0 * x1 + two_level + rng.normal(0, 0.05, 400)
    model, diag = fit_gam(np.column_stack([x1, two_level]), y,
                          feature_names=["x-acf1", "beta"])
    assert "beta" in diag.demoted
    assert "beta" in model.linear_names


def test_single_point_effect_grid():
    rng, x1, _ = _toy(13)
    y = 2.0 * x1 + rng.normal(0, 0.05, 400)
    model, _ = fit_gam(x1.reshape(-1, 1), y, feature_names=["x-acf1"])
    out = partial_effect(model, "x-acf1", [0.25])
    assert out.shape == (1,)
    assert np.isfinite(out[0])


def test_too_few_rows_rejected():
    rng, x1, _ = _toy(14)
    with pytest.raises(InsufficientData):
        fit_gam(x1[:150].reshape(-1, 1), x1[:150], feature_names=["x-acf1"])


def test_nonfinite_responses_dropped_not_fatal():
    rng, x1, _ = _toy(15)
    y = 2.0 * x1 + rng.normal(0, 0.05, 400)
    y[::7] = np.nan
    model, _ = fit_gam(x1.reshape(-1, 1), y, feature_names=["x-acf1"])
    grid = np.linspace(-1, 1, 11)
    eff = partial_effect(model, "x-acf1", grid)
    true = 2.0 * grid - np.mean(2.0 * x1)
    assert np.sqrt(np.mean((eff - true) ** 2)) < 0.05


def test_registry_hash_guard():
    rng, x1, _ = _toy(16)
    y = 2.0 * x1 + rng.normal(0, 0.05, 400)
    model, _ = fit_gam(x1.reshape(-1, 1), y, feature_names=["x-acf1"])
    stale = dataclasses.replace(model, registry_hash="0" * 64)
    with pytest.raises(RegistryMismatch):
        predict_matrix(stale, x1.reshape(-1, 1))


def test_duplicate_columns_trigger_ridge_fallback():
    rng, x1, _ = _toy(17)
    y = np.sin(3 * x1) + rng.normal(0, 0.05, 400)
    X = np.column_stack([x1, x1])
    model, diag = fit_gam(X, y, feature_names=["x-acf1", "x-acf10"])
    assert diag.ridged
    pred = predict_matrix(model, X)
    assert np.all(np.isfinite(pred))
    assert np.std(y - pred) < 0.2
