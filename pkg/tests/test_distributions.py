import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ndsqueue.distributions import (
    PRESETS,
    Bimodal,
    Deterministic,
    Exponential,
    ParameterError,
    RandomStream,
    Weibull,
    exp_interarrival,
    get_distribution,
    moments,
    sample,
)

# mean, variance
TABLE = {
    "det": (1.0, 0.0),
    "exp": (1.0, 1.0),
    "bim1": (1.0, 2.25),
    "weib1": (1.0, 5.0),
    "weib2": (1.0, 19.0),
    "bim2": (1.0, 24.75),
}


@pytest.mark.parametrize("name", list(TABLE))
def test_preset_moments(name):
    m, v = moments(name)
    assert m == pytest.approx(TABLE[name][0], abs=1e-12)
    assert v == pytest.approx(TABLE[name][1], abs=1e-12)


def test_presets_sorted_by_variance():
    variances = [moments(d)[1] for d in PRESETS.values()]
    assert variances == sorted(variances)


@pytest.mark.parametrize("name", ["det", "exp", "bim1", "weib1", "bim2"])
def test_sample_mean(name):
    x = sample(name, RandomStream(3, 1), 400_000)
    m, v = moments(name)
    # five standard errors
    assert abs(x.mean() - m) <= 5 * math.sqrt(v / len(x)) + 1e-12
    assert np.all(x > 0)


def test_scalar_sample_is_float():
    assert isinstance(sample("exp", RandomStream(0)), float)
    assert sample("det", RandomStream(0)) == 1.0


def test_bimodal_support():
    x = sample("bim1", RandomStream(5), 10_000)
    assert set(np.unique(x)) == {0.5, 5.5}


def test_weibull_median():
    w = Weibull(0.5, 0.5)
    x = sample(w, RandomStream(2), 200_000)
    med = w.scale * math.log(2) ** (1 / w.shape)
    assert np.median(x) == pytest.approx(med, rel=0.02)


def test_same_key_same_sequence():
    a = RandomStream(42, 7).random(100)
    b = RandomStream(42, 7).random(100)
    np.testing.assert_array_equal(a, b)


def test_streams_differ():
    a = RandomStream(42, 0).random(10)
    b = RandomStream(42, 1).random(10)
    c = RandomStream(43, 0).random(10)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_substreams_distinct_and_reproducible():
    s = RandomStream(9, 2)
    kids = [s.substream(i) for i in range(5)]
    ids = {k.stream_id for k in kids}
    assert len(ids) == 5 and 2 not in ids
    np.testing.assert_array_equal(s.substream(3).random(5), RandomStream(9, 2).substream(3).random(5))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**63 - 1), sid=st.integers(0, 2**63 - 1))
def test_stream_reproducible_property(seed, sid):
    assert RandomStream(seed, sid).random() == RandomStream(seed, sid).random()


@pytest.mark.parametrize("bad", [
    lambda: Deterministic(0.0),
    lambda: Exponential(-1.0),
    lambda: Bimodal(1.0, 1.0, 2.0),
    lambda: Bimodal(0.5, -1.0, 2.0),
    lambda: Weibull(0.0, 1.0),
    lambda: Weibull(1.0, math.inf),
    lambda: get_distribution("pareto"),
])
def test_bad_parameters(bad):
    with pytest.raises(ParameterError):
        bad()


def test_interarrival():
    x = exp_interarrival(4.0, RandomStream(1), 200_000)
    assert x.mean() == pytest.approx(0.25, rel=0.01)
    with pytest.raises(ParameterError):
        exp_interarrival(0.0, RandomStream(1))


def test_custom_distribution_passthrough():
    d = Bimodal(0.5, 1.0, 3.0)
    assert get_distribution(d) is d
    assert moments(d) == (2.0, 1.0)
