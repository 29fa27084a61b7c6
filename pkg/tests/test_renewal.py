import math

import numpy as np
import pytest

from betacoal import CoalescentParams, RegimeError, ResourceCapError
from betacoal._rng import rng_stream
from betacoal.renewal import (
    exact_first_passage_law,
    sample_first_passage,
    sample_first_passages,
)
from oracles import passage_law_by_sequences


def test_zero_level_needs_no_steps():
    assert sample_first_passage(0, CoalescentParams(1, 1), rng_stream(0)) == 0


def test_level_one_needs_one_step():
    p = CoalescentParams(0.4, 1)
    assert set(sample_first_passages(1, p, 500, 1)) == {1}
    np.testing.assert_allclose(exact_first_passage_law(1, p).probs, [1.0])


def test_level_two_exact_and_sampled():
    p = CoalescentParams(1, 1)
    np.testing.assert_allclose(exact_first_passage_law(2, p).probs, [0.5, 0.5], rtol=1e-14)
    draws = sample_first_passages(2, p, 100_000, 3)
    assert abs((draws == 1).mean() - 0.5) <= 4 * math.sqrt(0.25 / draws.size)


def test_level_three_a_one():
    law = exact_first_passage_law(3, CoalescentParams(1, 1))
    assert law.probs[0] == pytest.approx(1 / 3, rel=1e-14)
    assert math.fsum(law.probs) == pytest.approx(1, abs=1e-15)


@pytest.mark.parametrize("a", [0.25, 0.5, 1.0])
@pytest.mark.parametrize("n", range(1, 9))
def test_law_matches_sequence_enumeration(a, n):
    brute = passage_law_by_sequences(n, a)
    law = exact_first_passage_law(n, CoalescentParams(a, 1))
    expected = np.array([brute.get(j, 0.0) for j in law.support])
    np.testing.assert_allclose(law.probs, expected, atol=1e-12)


@pytest.mark.parametrize("a", [0.5, 1.0])
def test_sampler_matches_exact_law(a):
    p = CoalescentParams(a, 1)
    law = exact_first_passage_law(30, p)
    draws = sample_first_passages(30, p, 100_000, 8)
    freq = np.bincount(draws, minlength=31)[1:] / draws.size
    np.testing.assert_allclose(freq, law.probs, atol=5 * np.sqrt(0.25 / draws.size))


def test_mean_grows_with_level():
    p = CoalescentParams(0.5, 1)
    means = [exact_first_passage_law(n, p).mean() for n in range(1, 200)]
    assert np.all(np.diff(means) >= -1e-12)


def test_large_level_mean_near_normalization():
    n = 10**5
    draws = sample_first_passages(n, CoalescentParams(1, 1), 10**4, 12)
    assert draws.mean() == pytest.approx(n / math.log(n), rel=0.10)


def test_exact_law_cap():
    with pytest.raises(ResourceCapError):
        exact_first_passage_law(50, CoalescentParams(1, 1), cap=10)


def test_out_of_scope_a():
    with pytest.raises(RegimeError):
        sample_first_passages(10, CoalescentParams(1.5, 1), 3, 0)
