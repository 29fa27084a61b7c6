"""Renewal approximation: the random walk with limiting step law and its
first-passage counts N_n = inf{k : S_k >= n}."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from . import _rng
from .errors import ResourceCapError
from .rates import CoalescentParams, limit_step_pmf, limit_step_tail

LAW_CAP = 2_000


@dataclass(frozen=True)
class FirstPassageLaw:
    """Law of N_n; ``probs[j-1]`` is P{N_n = j} for j = 1..n."""

    n: int
    probs: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return np.arange(1, self.n + 1)

    def mean(self) -> float:
        return math.fsum(self.support * self.probs)


@numba.njit(cache=True, inline="always")
def _step_capped(u, a, cap):
    # xi ^ cap by CDF scan over p_{k+1}/p_k = (k+a-1)/(k+2)
    p = (2.0 - a) / 2.0
    cdf = p
    k = 1
    while u >= cdf and k < cap:
        p *= (k + a - 1.0) / (k + 2.0)
        k += 1
        cdf += p
    return k


@numba.njit(cache=True)
def _passage(n, a, state):
    st = state[0]
    level = 0
    count = 0
    while level < n:
        st, u = _rng.step(st)
        level += _step_capped(u, a, n - level)
        count += 1
    state[0] = st
    return count


@numba.njit(cache=True)
def _passage_block(n, a, seed, start, count, out):
    state = np.empty(1, dtype=np.uint64)
    for i in range(count):
        state[0] = _rng.stream_start(seed, np.uint64(start + i))
        out[i] = _passage(n, a, state)


def sample_first_passage(n: int, params: CoalescentParams, rng: np.ndarray) -> int:
    """One draw of N_n. Steps are only resolved up to the remaining distance,
    so infinite-mean step laws (a = 1) still cost O(log n) per step."""
    params.require_limit_regime()
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 0
    return int(_passage(n, params.a, rng))


def sample_first_passages(n: int, params: CoalescentParams, replicates: int, seed: int) -> np.ndarray:
    """``replicates`` draws of N_n, replicate i on stream i of ``seed``."""
    params.require_limit_regime()
    out = np.empty(replicates, dtype=np.int64)
    if n == 0:
        out[:] = 0
        return out
    _passage_block(n, params.a, np.uint64(seed), 0, replicates, out)
    return out


@numba.njit(cache=True)
def _passage_laws(n_max, pmf, tail):
    # law[m, j] = P{N_m = j}; N_m = 1 + N_{m - xi} on {xi < m}, else 1
    law = np.zeros((n_max + 1, n_max + 1))
    law[0, 0] = 1.0
    for m in range(1, n_max + 1):
        law[m, 1] += tail[m]
        for k in range(1, m):
            pk = pmf[k]
            row = law[m - k]
            for j in range(0, m - k + 1):
                law[m, j + 1] += pk * row[j]
    return law


def exact_first_passage_laws(n_max: int, params: CoalescentParams, cap: int = LAW_CAP) -> np.ndarray:
    """Matrix whose row m holds P{N_m = j}, j = 0..n_max, for m = 0..n_max."""
    params.require_limit_regime()
    if n_max > cap:
        raise ResourceCapError(f"n={n_max} exceeds first-passage law cap {cap}")
    k = np.arange(0, n_max + 1)
    pmf = np.zeros(n_max + 1)
    pmf[1:] = limit_step_pmf(params, k[1:])
    tail = np.ones(n_max + 1)
    tail[1:] = limit_step_tail(params, k[1:])
    return _passage_laws(n_max, pmf, tail)


def exact_first_passage_law(n: int, params: CoalescentParams, cap: int = LAW_CAP) -> FirstPassageLaw:
    """Exact law of N_n by dynamic programming over levels."""
    if n < 1:
        raise ValueError("n must be >= 1")
    laws = exact_first_passage_laws(n, params, cap)
    return FirstPassageLaw(n, laws[n, 1 : n + 1].copy())
