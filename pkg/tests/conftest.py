"""Shared fixtures: one small trained ensemble reused across test modules."""
import numpy as np
import pytest

from fuma.generator import LengthSampler, generate_one
from fuma.pipeline.train import TrainConfig, train

TINY_SEED = 11
TINY_PER_FREQ = 70
HOLD_PER_FREQ = 15


def _generate(seed, start, count):
    series = []
    for freq in ("yearly", "quarterly", "monthly"):
        sampler = LengthSampler.default(freq)
        for i in range(start, start + count):
            series.append(generate_one(seed, freq, i, sampler))
    return series


@pytest.fixture(scope="session")
def tiny_reference():
    """210 generated series: the smallest set the error models accept."""
    return _generate(TINY_SEED, 0, TINY_PER_FREQ)


@pytest.fixture(scope="session")
def tiny_holdout():
    """45 fresh series from the same generator, final horizon held out."""
    full = _generate(TINY_SEED, TINY_PER_FREQ, HOLD_PER_FREQ)
    observed = [s.with_values(s.values[:-s.horizon]) for s in full]
    actuals = {s.id: s.values[-s.horizon:] for s in full}
    return observed, actuals


@pytest.fixture(scope="session")
def tiny_train_result(tiny_reference):
    """One real training run shared by pipeline, CLI, and acceptance tests."""
    return train(tiny_reference, TrainConfig(seed=TINY_SEED), jobs=4)


@pytest.fixture(scope="session")
def tiny_ensemble(tiny_train_result):
    return tiny_train_result.ensemble
