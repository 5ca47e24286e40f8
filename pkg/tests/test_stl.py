import numpy as np
import pytest

from fuma.errors import InsufficientData
from fuma.features.stl import Decomposition, decompose


def seasonal_series(n=96, m=12, slope=0.3, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    t = np.arange(n, dtype=float)
    cycle = np.sin(2 * np.pi * t / m)
    return slope * t + 3.0 * cycle + noise * rng.normal(size=n)


class TestDecompose:
    def test_components_sum_exactly(self):
        y = seasonal_series(noise=0.5)
        dec = decompose(y, 12)
        assert y == pytest.approx(dec.trend + dec.seasonal + dec.remainder,
                                  abs=1e-12)

    def test_cycle_sums_to_zero(self):
        y = seasonal_series(noise=0.5, seed=3)
        dec = decompose(y, 12)
        for start in range(0, 96 - 12, 12):
            assert abs(dec.seasonal[start:start + 12].sum()) < 1e-6

    def test_seasonal_is_periodic(self):
        dec = decompose(seasonal_series(), 12)
        assert dec.seasonal[:12] == pytest.approx(dec.seasonal[12:24])

    def test_recovers_strong_seasonal_pattern(self):
        y = seasonal_series(noise=0.2, seed=1)
        dec = decompose(y, 12)
        t = np.arange(96, dtype=float)
        cycle = 3.0 * np.sin(2 * np.pi * t / 12)
        # seasonal component correlates almost perfectly with the truth
        corr = np.corrcoef(dec.seasonal, cycle)[0, 1]
        assert corr > 0.99

    def test_nonseasonal_mode_has_zero_seasonal(self):
        y = seasonal_series(m=1)
        dec = decompose(y, 1)
        assert np.all(dec.seasonal == 0.0)
        assert dec.cycle.size == 0

    def test_short_seasonal_series_rejected(self):
        with pytest.raises(InsufficientData):
            decompose(np.arange(24.0), 12)

    def test_minimum_length_accepted(self):
        dec = decompose(np.arange(25.0), 12)
        assert isinstance(dec, Decomposition)

    def test_robust_pass_limits_outlier_leakage(self):
        y = 0.5 * np.arange(60, dtype=float)
        y[30] += 50.0
        robust = decompose(y, 1, robust_passes=1)
        plain = decompose(y, 1, robust_passes=0)
        truth = 0.5 * np.arange(60, dtype=float)
        mask = np.ones(60, dtype=bool)
        mask[28:33] = False
        err_robust = np.max(np.abs(robust.trend - truth)[mask])
        err_plain = np.max(np.abs(plain.trend - truth)[mask])
        assert err_robust <= err_plain

    def test_quarterly_window_recovers_trend(self):
        y = seasonal_series(n=48, m=4, noise=0.0)
        dec = decompose(y, 4)
        t = np.arange(48, dtype=float)
        # interior trend points track the true line closely
        assert dec.trend[6:-6] == pytest.approx(0.3 * t[6:-6], abs=0.25)
