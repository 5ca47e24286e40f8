import numpy as np
import pytest

from fuma.errors import ZeroDenominator
from fuma.metrics import acd, covered_count, mase, msis, seasonal_scale

TRAIN = np.array([1.0, 2.0, 3.0, 4.0, 5.0])  # m=1 scale is exactly 1


class TestSeasonalScale:
    def test_unit_slope_m1(self):
        assert seasonal_scale(TRAIN, 1) == 1.0

    def test_seasonal_lag(self):
        # |y_t - y_{t-4}| is 4 everywhere on a ramp of step 1
        train = np.arange(12, dtype=float)
        assert seasonal_scale(train, 4) == pytest.approx(4.0)

    def test_constant_series_raises(self):
        with pytest.raises(ZeroDenominator):
            seasonal_scale(np.full(10, 3.0), 1)

    def test_exactly_seasonal_series_raises(self):
        train = np.tile([1.0, 5.0, 2.0, 7.0], 5)
        with pytest.raises(ZeroDenominator):
            seasonal_scale(train, 4)


class TestMsis:
    def test_width_only(self):
        # both actuals inside, width 2, scale 1: (2 + 2) / 2 = 2
        value = msis(test=[6.0, 7.0], lower=[5.0, 6.0], upper=[7.0, 8.0],
                     train=TRAIN, m=1, alpha=0.05)
        assert value == pytest.approx(2.0)

    def test_penalty_above(self):
        # step 1: y=8 > u=7 adds (2/0.05)*1 = 40; step 2 inside
        value = msis(test=[8.0, 7.0], lower=[5.0, 6.0], upper=[7.0, 8.0],
                     train=TRAIN, m=1, alpha=0.05)
        assert value == pytest.approx(22.0)

    def test_penalty_below_symmetric(self):
        value_above = msis(test=[8.0], lower=[5.0], upper=[7.0],
                           train=TRAIN, m=1, alpha=0.05)
        value_below = msis(test=[4.0], lower=[5.0], upper=[7.0],
                           train=TRAIN, m=1, alpha=0.05)
        assert value_above == pytest.approx(value_below)

    def test_degenerate_interval_on_actual_is_zero(self):
        test = np.array([6.0, 7.0])
        assert msis(test, test, test, TRAIN, 1, 0.05) == 0.0

    def test_boundary_hit_incurs_no_penalty(self):
        on_bound = msis(test=[7.0], lower=[5.0], upper=[7.0],
                        train=TRAIN, m=1, alpha=0.05)
        assert on_bound == pytest.approx(2.0)

    def test_scale_and_shift_invariance(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            n = int(rng.integers(10, 60))
            h = int(rng.integers(2, 9))
            train = rng.normal(size=n).cumsum() + 5.0
            test = rng.normal(size=h) + train[-1]
            centre = test + rng.normal(size=h)
            half = np.abs(rng.normal(size=h)) + 0.1
            lower, upper = centre - half, centre + half
            base = msis(test, lower, upper, train, 1, 0.05)
            c = float(np.exp(rng.normal()))
            s = float(rng.normal() * 10)
            scaled = msis(c * test, c * lower, c * upper, c * train, 1, 0.05)
            shifted = msis(test + s, lower + s, upper + s, train + s, 1, 0.05)
            assert scaled == pytest.approx(base, rel=1e-9)
            assert shifted == pytest.approx(base, rel=1e-9, abs=1e-9)

    def test_widening_never_helps_when_covered(self):
        # for actuals inside the interval, wider bounds can only raise MSIS
        rng = np.random.default_rng(7)
        for _ in range(100):
            h = int(rng.integers(2, 9))
            train = rng.normal(size=20).cumsum()
            test = rng.normal(size=h)
            half = np.abs(rng.normal(size=h)) + 0.5
            lower, upper = test - half, test + half
            tight = msis(test, lower, upper, train, 1, 0.05)
            wide = msis(test, lower - 1.0, upper + 1.0, train, 1, 0.05)
            assert wide > tight


class TestMase:
    def test_simple_oracle(self):
        # errors [0, 1], scale 1: mean is 0.5
        assert mase([6.0, 8.0], [6.0, 7.0], TRAIN, 1) == pytest.approx(0.5)

    def test_perfect_forecast_is_zero(self):
        assert mase([6.0, 7.0], [6.0, 7.0], TRAIN, 1) == 0.0

    def test_scale_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            train = rng.normal(size=30).cumsum() + 10
            test = rng.normal(size=6)
            point = test + rng.normal(size=6)
            base = mase(test, point, train, 1)
            c = float(np.abs(rng.normal()) + 0.5)
            assert mase(c * test, c * point, c * train, 1) == pytest.approx(
                base, rel=1e-9)


class TestCoverage:
    def test_boundary_counts_as_covered(self):
        assert covered_count([5.0, 7.0], [5.0, 6.0], [6.0, 7.0]) == 2

    def test_outside_not_covered(self):
        assert covered_count([4.9, 7.1], [5.0, 6.0], [6.0, 7.0]) == 0

    def test_acd_oracle(self):
        # 90 of 100 covered at 95% nominal: |0.90 - 0.95| = 0.05
        assert acd(90, 100, 0.95) == pytest.approx(0.05)
        assert acd(95, 100, 0.95) == pytest.approx(0.0)
        assert acd(100, 100, 0.95) == pytest.approx(0.05)

    def test_acd_pools_counts_not_rates(self):
        # pooling 3/4 and 1/1 gives 4/5, not the mean of the two rates
        covered = covered_count([1.0, 2.0, 3.0, 9.0], np.zeros(4), np.full(4, 5.0))
        covered += covered_count([1.0], [0.0], [5.0])
        assert acd(covered, 5, 0.95) == pytest.approx(abs(4 / 5 - 0.95))
