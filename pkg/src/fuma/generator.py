"""Reference-data generation from mixture-autoregressive models.

Each series draws a random MAR specification (component count, AR
coefficients, seasonal coefficient, innovation scales, mixing weights),
simulates the mixture over a shared history, and shifts the result to be
strictly positive. Per-series RNG streams are derived from the master seed
and the series index, so generation is order-independent and exactly
reproducible under any parallel schedule.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fuma import _numerics as nx
from fuma.core import (
    FREQUENCY_BY_PERIOD,
    HORIZON_BY_FREQUENCY,
    PERIOD_BY_FREQUENCY,
    TimeSeries,
)
from fuma.errors import NonFiniteSimulation

P_MAX = 3

_FREQ_CODE = {"yearly": 0, "quarterly": 1, "monthly": 2}

# log-normal fallbacks per frequency: (log-median, log-sigma, lo, hi)
_LENGTH_DEFAULTS = {
    "yearly": (np.log(32.0), 0.40, 9, 80),
    "quarterly": (np.log(90.0), 0.35, 14, 200),
    "monthly": (np.log(140.0), 0.35, 32, 320),
}


def min_length(frequency: str) -> int:
    """Smallest usable length: period + 2 + horizon."""
    return PERIOD_BY_FREQUENCY[frequency] + 2 + HORIZON_BY_FREQUENCY[frequency]


@dataclass(frozen=True)
class LengthSampler:
    """Series-length distribution: empirical resampling or log-normal."""

    lo: int
    hi: int
    empirical: tuple[int, ...] | None = None
    log_median: float = 0.0
    log_sigma: float = 0.0

    def __post_init__(self):
        if self.lo < 3 or self.hi < self.lo:
            raise ValueError("need 3 <= lo <= hi")
        if self.empirical is not None and len(self.empirical) == 0:
            raise ValueError("empirical length list must be non-empty")

    @classmethod
    def default(cls, frequency: str) -> "LengthSampler":
        log_med, log_sig, lo, hi = _LENGTH_DEFAULTS[frequency]
        lo = max(lo, min_length(frequency))
        return cls(lo=lo, hi=hi, log_median=log_med, log_sigma=log_sig)

    @classmethod
    def from_lengths(cls, lengths, frequency: str) -> "LengthSampler":
        floor = min_length(frequency)
        kept = tuple(int(v) for v in lengths if int(v) >= floor)
        if not kept:
            raise ValueError(
                f"no observed length reaches the {frequency} floor of {floor}")
        return cls(lo=floor, hi=max(kept), empirical=kept)

    def sample(self, rng: np.random.Generator) -> int:
        if self.empirical is not None:
            return int(self.empirical[rng.integers(len(self.empirical))])
        draw = np.exp(self.log_median + self.log_sigma * rng.standard_normal())
        return int(np.clip(round(draw), self.lo, self.hi))


@dataclass(frozen=True)
class MarSpec:
    """One mixture-autoregressive model: K components over a shared history."""

    weights: np.ndarray
    ar_coefs: tuple[np.ndarray, ...]
    seasonal_coefs: np.ndarray
    sigmas: np.ndarray
    period: int

    def __post_init__(self):
        if abs(float(np.sum(self.weights)) - 1.0) > 1e-9:
            raise ValueError("mixing weights must sum to 1")
        if np.any(self.weights < 0):
            raise ValueError("mixing weights must be non-negative")
        if np.any(self.sigmas <= 0):
            raise ValueError("innovation scales must be positive")
        for k, phi in enumerate(self.ar_coefs):
            if len(phi) and nx.ar_margin(np.asarray(phi, dtype=np.float64)) >= 1.0:
                raise ValueError(f"component {k} is non-stationary")
            if abs(self.seasonal_coefs[k]) >= 1.0:
                raise ValueError(f"component {k} seasonal coefficient outside (-1, 1)")

    @property
    def n_components(self) -> int:
        return len(self.weights)


def _stationary_draw(rng: np.random.Generator, order: int) -> np.ndarray:
    """AR coefficients ~ N(0, 0.5^2), rejected until stationary.

    After 1000 rejections the last draw is shrunk toward zero
    deterministically, which always terminates.
    """
    if order == 0:
        return np.zeros(0)
    phi = rng.normal(0.0, 0.5, size=order)
    for _ in range(1000):
        if nx.ar_margin(phi.copy()) < 0.99:
            return phi
        phi = rng.normal(0.0, 0.5, size=order)
    while nx.ar_margin(phi.copy()) >= 0.99:
        phi = phi * 0.9
    return phi


def sample_mar_spec(frequency: str, rng: np.random.Generator) -> MarSpec:
    """Draw a random stationary MAR specification for one frequency.

    One spec in five (seasonal frequencies only) is drawn from a persistent-
    seasonal regime where every component carries a near-unit seasonal root;
    without it the generated population never reaches the high end of the
    seasonal-strength scale.
    """
    m = PERIOD_BY_FREQUENCY[frequency]
    k = int(rng.integers(1, 4))
    persistent_seasonal = m > 1 and rng.random() < 0.2
    ar = []
    seas = np.zeros(k)
    for j in range(k):
        order = int(rng.integers(0, P_MAX + 1))
        ar.append(_stationary_draw(rng, order))
        if persistent_seasonal:
            seas[j] = rng.uniform(0.85, 0.98)
        elif m > 1 and rng.random() < 0.7:
            seas[j] = rng.uniform(-0.5, 0.9)
    sigmas = np.abs(rng.standard_normal(k)) + 0.1
    weights = rng.dirichlet(np.ones(k))
    return MarSpec(weights=weights, ar_coefs=tuple(ar), seasonal_coefs=seas,
                   sigmas=sigmas, period=m)


def simulate_mar(spec: MarSpec, length: int, rng: np.random.Generator,
                 series_id: str = "sim", horizon: int | None = None) -> TimeSeries:
    """Simulate one strictly positive series of the requested length."""
    m = spec.period
    k = spec.n_components
    burnin = max(10 * P_MAX, 5 * m)
    total = burnin + length

    expanded = [nx._expand_seasonal(np.asarray(phi, dtype=np.float64),
                                    float(spec.seasonal_coefs[j]), m)
                for j, phi in enumerate(spec.ar_coefs)]
    width = max((len(e) for e in expanded), default=0)
    coef_matrix = np.zeros((k, max(width, 1)))
    for j, e in enumerate(expanded):
        coef_matrix[j, :len(e)] = e

    component_idx = rng.choice(k, size=total, p=spec.weights).astype(np.int64)
    normals = rng.standard_normal(total)
    values = nx.mar_simulate_path(coef_matrix, spec.sigmas.astype(np.float64),
                                  component_idx, normals, length, burnin)
    if not np.all(np.isfinite(values)):
        raise NonFiniteSimulation(
            f"series {series_id!r}: non-finite values after burn-in")

    vmin, vmax = float(values.min()), float(values.max())
    value_range = vmax - vmin
    if value_range <= 0.0:
        value_range = max(abs(vmin), 1.0)
    values = values - vmin + 0.01 * value_range

    if horizon is None:
        horizon = HORIZON_BY_FREQUENCY[FREQUENCY_BY_PERIOD[m]]
    return TimeSeries(id=series_id, values=values, period=m, horizon=horizon)


def series_seed_sequence(master_seed: int, frequency: str,
                         index: int) -> np.random.SeedSequence:
    """The per-series RNG root: (master seed, frequency code, index)."""
    return np.random.SeedSequence(master_seed,
                                  spawn_key=(_FREQ_CODE[frequency], index))


def generate_one(master_seed: int, frequency: str, index: int,
                 sampler: LengthSampler) -> TimeSeries:
    """Generate the index-th series of a frequency (order-independent)."""
    rng = np.random.default_rng(series_seed_sequence(master_seed, frequency,
                                                     index))
    length = sampler.sample(rng)
    spec = sample_mar_spec(frequency, rng)
    sid = f"{frequency}-s{master_seed}-{index:06d}"
    return simulate_mar(spec, length, rng, series_id=sid,
                        horizon=HORIZON_BY_FREQUENCY[frequency])


def generate_reference_set(counts: dict[str, int], master_seed: int,
                           samplers: dict[str, LengthSampler] | None = None,
                           ) -> list[TimeSeries]:
    """Generate ``counts[frequency]`` series per frequency, deterministically.

    The per-series id records frequency, master seed, and index, so any
    single series can be regenerated in isolation.
    """
    out: list[TimeSeries] = []
    for frequency in ("yearly", "quarterly", "monthly"):
        count = counts.get(frequency, 0)
        if count < 0:
            raise ValueError("counts must be non-negative")
        sampler = (samplers or {}).get(frequency) or LengthSampler.default(frequency)
        for index in range(count):
            try:
                out.append(generate_one(master_seed, frequency, index, sampler))
            except NonFiniteSimulation as exc:
                raise NonFiniteSimulation(
                    f"{frequency} series {index}: {exc}") from exc
    return out
