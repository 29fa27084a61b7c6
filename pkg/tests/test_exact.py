import io
import math

import numpy as np
import pytest

from betacoal import CoalescentParams, ResourceCapError
from betacoal.exact import (
    DiscreteLaw,
    central_moments,
    exact_law_X,
    exact_laws_X,
    exact_mean_tau,
    exact_moments_gap,
    exact_moments_L,
    exact_moments_tau,
    exact_moments_X,
    total_rates_exact,
)
from betacoal.rates import total_rate_generic
from oracles import collision_law_by_paths, jump_probs, mean_collisions

BS = CoalescentParams(1, 1)


@pytest.mark.parametrize("a, b", [(1, 1), (0.5, 1), (1, 2), (0.3, 4)])
def test_two_states_take_one_collision(a, b):
    t = exact_moments_X(2, 3, CoalescentParams(a, b))
    assert [t.moment(2, j) for j in range(4)] == [1.0, 1.0, 1.0, 1.0]


def test_small_collision_means():
    t = exact_moments_X(4, 1, BS)
    assert t.moment(3, 1) == pytest.approx(7 / 4, rel=1e-14)
    p4 = jump_probs(4, 1, 1)
    assert t.moment(4, 1) == pytest.approx(1 + p4[1] * 7 / 4 + p4[2] * 1, rel=1e-13)


@pytest.mark.parametrize("a, b", [(1, 1), (0.5, 1), (0.7, 2.5)])
def test_collision_means_match_memoized_recursion(a, b):
    t = exact_moments_X(40, 1, CoalescentParams(a, b))
    for n in (5, 17, 40):
        assert t.moment(n, 1) == pytest.approx(mean_collisions(n, a, b), rel=1e-12)


def test_branch_length_small_cases():
    t = exact_moments_L(3, 1, BS)
    assert t.moment(1, 1) == 0
    assert t.moment(2, 1) == pytest.approx(2, rel=1e-14)
    assert t.moment(3, 1) == pytest.approx(3, rel=1e-14)


def test_absorption_time_small_cases():
    np.testing.assert_allclose(exact_mean_tau(3, BS), [0, 0, 1, 1.25], rtol=1e-14)


def test_second_moment_of_exponential_time():
    # tau_2 ~ Exp(1): E tau^2 = 2, E tau^3 = 6
    t = exact_moments_tau(2, 3, BS)
    assert [t.moment(2, j) for j in (1, 2, 3)] == pytest.approx([1, 2, 6], rel=1e-14)


@pytest.mark.parametrize("b", [0.5, 2.0])
def test_gap_moments_consistent_with_mean_identity(b):
    p = CoalescentParams(1, b)
    g = exact_moments_gap(200, 2, p)
    x = exact_moments_X(200, 1, p)
    l = exact_moments_L(200, 1, p)
    for n in (2, 50, 200):
        assert g.moment(n, 1) == pytest.approx(b * l.moment(n, 1) - x.moment(n, 1), abs=1e-9 * n)
        assert g.moment(n, 2) >= 0


def test_central_moments_small_cases():
    t = exact_moments_X(3, 3, BS)
    assert central_moments(t, 2, 2) == 0.0
    assert central_moments(t, 2, 3) == 0.0
    assert central_moments(t, 3, 2) == pytest.approx(3 / 16, rel=1e-13)


@pytest.mark.parametrize("a, b", [(1, 1), (0.5, 1), (1, 2)])
@pytest.mark.parametrize("n", range(2, 7))
def test_law_matches_path_enumeration(a, b, n):
    brute = collision_law_by_paths(n, a, b)
    law = exact_law_X(n, CoalescentParams(a, b))
    for x, p in zip(law.support, law.probs):
        assert p == pytest.approx(brute.get(int(x), 0.0), abs=1e-12)
    assert sum(brute.values()) == pytest.approx(1, abs=1e-13)


def test_law_at_three():
    law = exact_law_X(3, BS)
    np.testing.assert_allclose(law.probs, [0.25, 0.75], rtol=1e-14)
    assert exact_law_X(2, BS).probs.tolist() == [1.0]


@pytest.mark.parametrize("a, b", [(0.5, 1), (1, 2)])
def test_law_and_moments_agree(a, b):
    p = CoalescentParams(a, b)
    laws = exact_laws_X(2000, p)
    t = exact_moments_X(2000, 2, p)
    for n in (10, 500, 2000):
        law = DiscreteLaw.from_dense(laws[n, :n].copy())
        assert law.mean() == pytest.approx(t.moment(n, 1), abs=1e-10 * n)
        assert law.central_moment(2) == pytest.approx(central_moments(t, n, 2), rel=1e-8)


def test_row_sums_reproduce_total_rates():
    p = CoalescentParams(0.6, 1.7)
    lams = total_rates_exact(300, p)
    for n in (2, 30, 300):
        assert lams[n] == pytest.approx(total_rate_generic(n, p), rel=1e-12)


def test_caps():
    with pytest.raises(ResourceCapError):
        exact_moments_X(100, 2, BS, cap=50)
    with pytest.raises(ResourceCapError):
        exact_law_X(100, BS, cap=50)


def test_discrete_law_validation():
    with pytest.raises(ValueError):
        DiscreteLaw(np.array([1, 1]), np.array([0.5, 0.5]))
    assert DiscreteLaw.from_dense(np.array([0.0, 0.5, 0.5]), offset=2).support.tolist() == [3, 4]


def test_moment_table_csv():
    buf = io.StringIO()
    exact_moments_X(3, 1, BS).write_csv(buf)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "n,j,functional,value"
    assert rows[-1] == "3,1,X,1.75"
