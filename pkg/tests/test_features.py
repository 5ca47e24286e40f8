import hashlib

import numpy as np
import pytest

from fuma.errors import UnknownFeature
from fuma.features import (
    FEATURE_NAMES,
    FEATURES,
    N_FEATURES,
    FeatureVector,
    compute_features,
    index_of,
    registry_hash,
    registry_table,
    validate_vector,
)

# features whose value comes out of an iterative optimizer; invariance holds
# only up to optimizer path sensitivity
_OPTIMIZER_FEATURES = {"alpha", "beta", "hw-alpha", "hw-beta", "hw-gamma",
                       "garch-acf", "garch-r2"}


def random_series(rng, m):
    n = int(rng.integers(max(30, 3 * m), 160))
    t = np.arange(n)
    y = (rng.normal() * 0.1 * t
         + 2.0 * rng.normal() * np.sin(2 * np.pi * t / max(m, 4))
         + rng.normal(size=n).cumsum() * 0.3
         + rng.normal(size=n))
    return y, n


class TestRegistry:
    def test_43_unique_features(self):
        assert N_FEATURES == 43
        assert len(FEATURE_NAMES) == 43
        assert len(set(FEATURE_NAMES)) == 43

    def test_hash_matches_table(self):
        expect = hashlib.sha256(registry_table().encode()).hexdigest()
        assert registry_hash() == expect

    def test_table_lists_every_feature(self):
        table = registry_table()
        for name in FEATURE_NAMES:
            assert f"\n{name} | " in table
        assert table.startswith("feature registry version 1")

    def test_index_roundtrip(self):
        for i, name in enumerate(FEATURE_NAMES):
            assert index_of(name) == i
        with pytest.raises(UnknownFeature):
            index_of("no-such-feature")

    def test_ranges_are_ordered(self):
        for spec in FEATURES:
            assert spec.lo < spec.hi

    def test_validate_rejects_out_of_range(self):
        vec = np.zeros(N_FEATURES)
        vec[index_of("flat-spots")] = 1.0
        vec[index_of("hurst")] = 0.5
        vec[index_of("length")] = 30.0
        validate_vector(vec)
        bad = vec.copy()
        bad[index_of("x-acf1")] = 1.5
        with pytest.raises(ValueError):
            validate_vector(bad)


class TestComputeOracles:
    def test_constant_series_is_degenerate_not_fatal(self):
        fv = compute_features(np.full(40, 7.0), 12)
        assert fv.degenerate
        d = fv.as_dict()
        assert d["x-acf1"] == 0.0
        assert d["flat-spots"] == 40.0
        assert d["length"] == 40.0
        assert d["seasonal-period-m"] == 1.0

    def test_seasonal_sine(self):
        t = np.arange(120, dtype=float)
        y = 10.0 + np.sin(2 * np.pi * t / 12)
        d = compute_features(y, 12).as_dict()
        assert d["seasonal-strength"] > 0.95
        assert d["entropy"] < 0.5
        assert d["seas-acf1"] > 0.8
        assert 0.0 < d["peak"] <= 1.0
        assert 0.0 < d["trough"] <= 1.0
        assert d["peak"] != d["trough"]

    def test_linear_ramp(self):
        y = 2.0 + 0.5 * np.arange(80)
        d = compute_features(y, 1).as_dict()
        assert d["trend-strength"] > 0.95
        assert d["linearity"] > 1.0
        assert d["x-acf1"] > 0.9
        # first difference of a ramp is constant: its acf block is all zero
        assert d["diff1-acf1"] == 0.0
        assert d["diff1-acf10"] == 0.0

    def test_white_noise(self):
        rng = np.random.default_rng(8)
        d = compute_features(rng.normal(size=300), 1).as_dict()
        assert d["entropy"] > 0.8
        assert d["trend-strength"] < 0.3
        assert abs(d["x-acf1"]) < 0.2
        assert d["x-acf10"] < 0.5

    def test_dummies_and_length(self):
        y = np.random.default_rng(0).normal(size=60)
        d4 = compute_features(y, 4).as_dict()
        assert (d4["nperiods"], d4["seasonal-period-q"],
                d4["seasonal-period-m"]) == (1.0, 1.0, 0.0)
        d1 = compute_features(y, 1).as_dict()
        assert (d1["nperiods"], d1["seasonal-period-q"],
                d1["seasonal-period-m"]) == (0.0, 0.0, 0.0)
        assert d1["length"] == 60.0

    def test_peak_trough_zero_for_nonseasonal(self):
        y = np.random.default_rng(1).normal(size=50)
        d = compute_features(y, 1).as_dict()
        assert d["peak"] == 0.0
        assert d["trough"] == 0.0
        assert d["seasonal-strength"] == 0.0
        assert d["hw-alpha"] == 0.0

    def test_volatility_clustering_raises_arch_stats(self):
        rng = np.random.default_rng(5)
        n = 400
        h = np.empty(n)
        z = np.empty(n)
        h[0] = 1.0
        z[0] = rng.normal()
        for t in range(1, n):
            h[t] = 0.1 + 0.55 * z[t - 1] ** 2 + 0.3 * h[t - 1]
            z[t] = np.sqrt(h[t]) * rng.normal()
        arch = compute_features(z, 1).as_dict()
        flat = compute_features(rng.normal(size=n), 1).as_dict()
        assert arch["arch-r2"] > flat["arch-r2"]
        assert arch["arch-lm"] > flat["arch-lm"]

    def test_short_series_never_aborts(self):
        for m, n in [(1, 3), (1, 5), (4, 6), (12, 14), (4, 9)]:
            y = np.random.default_rng(n).normal(size=n) + 0.2 * np.arange(n)
            fv = compute_features(y, m)
            assert fv.values.shape == (43,)


class TestInvariance:
    def test_shift_scale_per_registry_flags(self):
        rng = np.random.default_rng(99)
        for case in range(30):
            m = [1, 4, 12][case % 3]
            y, n = random_series(rng, m)
            a = float(rng.uniform(0.5, 3.0))
            b = float(rng.normal() * 10)
            base = compute_features(y, m).values
            scaled = compute_features(a * y + b, m).values
            shifted = compute_features(y + b, m).values
            for i, spec in enumerate(FEATURES):
                tol = 1e-4 if spec.name in _OPTIMIZER_FEATURES else 1e-7
                if spec.scale_invariant and spec.shift_invariant:
                    assert scaled[i] == pytest.approx(base[i], rel=tol, abs=tol), \
                        f"{spec.name} not scale-invariant (case {case})"
                if spec.shift_invariant:
                    assert shifted[i] == pytest.approx(base[i], rel=tol, abs=tol), \
                        f"{spec.name} not shift-invariant (case {case})"

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        for m in (1, 4, 12):
            y, _ = random_series(rng, m)
            v1 = compute_features(y, m).values
            v2 = compute_features(y, m).values
            assert np.array_equal(v1, v2)

    def test_every_vector_validates(self):
        rng = np.random.default_rng(123)
        for case in range(60):
            m = [1, 4, 12][case % 3]
            y, _ = random_series(rng, m)
            fv = compute_features(y, m)
            validate_vector(fv.values)  # raises on any range violation
            assert isinstance(fv, FeatureVector)
