"""Monte Carlo simulation of the block-counting chain and its functionals.

Each replicate owns a SplitMix64 stream keyed by (master_seed, replicate
index), so output is identical for any worker count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional, TextIO

import numba
import numpy as np

from . import _rng
from .rates import CoalescentParams, rate_tables, total_rate

CSV_HEADER = ("replicate", "n", "a", "b", "X", "tau", "L", "M")
BLOCK = 2048


@dataclass(frozen=True)
class FunctionalSample:
    n: int
    collisions: int
    absorption_time: float
    branch_length: float
    segregating_sites: Optional[int] = None
    path_length: int = 1
    path: Optional[tuple] = None


@dataclass(frozen=True)
class SimulationConfig:
    params: CoalescentParams
    n: int
    replicates: int
    master_seed: int = 0
    record_paths: bool = False

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")


@dataclass
class RunningSummary:
    """Welford accumulator; :meth:`merge` is associative and commutative."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    min: float = math.inf
    max: float = -math.inf

    def update(self, x: float) -> None:
        self.count += 1
        d = x - self.mean
        self.mean += d / self.count
        self.m2 += d * (x - self.mean)
        self.min = min(self.min, x)
        self.max = max(self.max, x)

    def merge(self, other: "RunningSummary") -> "RunningSummary":
        n = self.count + other.count
        if n == 0:
            return RunningSummary()
        d = other.mean - self.mean
        mean = self.mean + d * other.count / n
        m2 = self.m2 + other.m2 + d * d * self.count * other.count / n
        return RunningSummary(n, mean, m2, min(self.min, other.min), max(self.max, other.max))

    @classmethod
    def of(cls, values: np.ndarray) -> "RunningSummary":
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return cls()
        mean = float(values.mean())
        return cls(values.size, mean, float(((values - mean) ** 2).sum()),
                   float(values.min()), float(values.max()))

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 0 else math.inf


@numba.njit(cache=True, inline="always")
def _invert(u, m, a, b, p_first):
    # sequential CDF scan from k = 1; the last support point absorbs rounding
    p = p_first
    cdf = p
    k = 1
    last = m - 1
    c1 = m - 2.0
    c2 = a
    c3 = 3.0
    c4 = m + b - 3.0
    while u >= cdf and k < last:
        p *= (c1 * c2) / (c3 * c4)
        c1 -= 1.0
        c2 += 1.0
        c3 += 1.0
        c4 -= 1.0
        k += 1
        cdf += p
    return k


@numba.njit(cache=True)
def _decrement(m, a, b, p_first, state):
    return _invert(_rng.next_uniform(state), m, a, b, p_first)


@numba.njit(cache=True)
def _path(n, a, b, lam, p1, state, path_buf):
    m = n
    x = 0
    tau = 0.0
    length = 0.0
    record = path_buf.size > 0
    if record:
        path_buf[0] = n
    st = state[0]
    while m > 1:
        st, u = _rng.step(st)
        t = -math.log(1.0 - u) / lam[m]
        tau += t
        length += m * t
        st, u = _rng.step(st)
        m -= _invert(u, m, a, b, p1[m])
        x += 1
        if record:
            path_buf[x] = m
    state[0] = st
    return x, tau, length


@numba.njit(cache=True)
def _run_block(n, a, b, lam, p1, rate, seed, start, count, xs, taus, ls, ms):
    empty = np.empty(0, dtype=np.int64)
    state = np.empty(1, dtype=np.uint64)
    for i in range(count):
        state[0] = _rng.stream_start(seed, np.uint64(start + i))
        x, tau, length = _path(n, a, b, lam, p1, state, empty)
        xs[i] = x
        taus[i] = tau
        ls[i] = length
        if rate >= 0.0:
            ms[i] = _rng.next_poisson(state, rate * length)
        else:
            ms[i] = -1


@numba.njit(cache=True)
def _scan_lengths(m, a, b, p_first, state, draws):
    out = np.empty(draws, dtype=np.int64)
    for i in range(draws):
        out[i] = _decrement(m, a, b, p_first, state)
    return out


def _tables(n: int, params: CoalescentParams):
    return rate_tables(max(n, 2), params)


def sample_decrement(n: int, params: CoalescentParams, rng: np.ndarray) -> int:
    """Draw I_n by sequential CDF scan."""
    if n < 2:
        raise ValueError(f"sample_decrement requires n >= 2, got {n}")
    p_first = _first_prob(n, params)
    return int(_decrement(n, params.a, params.b, p_first, rng))


def _first_prob(n: int, params: CoalescentParams) -> float:
    a, b = params.a, params.b
    log_w1 = (math.log(n * (n - 1) / 2.0) + math.lgamma(a) + math.lgamma(n + b - 2.0)
              - math.lgamma(n + a + b - 2.0) - params.log_beta)
    return math.exp(log_w1) / total_rate(n, params)


def scan_steps(n: int, params: CoalescentParams, rng: np.ndarray, draws: int) -> np.ndarray:
    """Number of CDF terms examined by each of ``draws`` decrement draws.

    The scan stops at the sampled value, so this equals the drawn decrement.
    """
    return _scan_lengths(n, params.a, params.b, _first_prob(n, params), rng, draws)


def simulate_path(n: int, params: CoalescentParams, rng: np.ndarray,
                  record_path: bool = False) -> FunctionalSample:
    """Run the chain from n particles to absorption at 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lam, p1 = _tables(n, params)
    buf = np.zeros(n, dtype=np.int64) if record_path else np.empty(0, dtype=np.int64)
    x, tau, length = _path(n, params.a, params.b, lam, p1, rng, buf)
    m = None
    if params.mutation_rate is not None:
        m = int(_rng.next_poisson(rng, params.mutation_rate * length))
    path = tuple(int(s) for s in buf[: x + 1]) if record_path else None
    return FunctionalSample(n, int(x), float(tau), float(length), m, int(x) + 1, path)


def sample_segregating_sites(branch_length: float, mutation_rate: float, rng: np.ndarray) -> int:
    """Poisson number of mutations with mean mutation_rate * branch_length."""
    if branch_length < 0 or mutation_rate < 0:
        raise ValueError("branch_length and mutation_rate must be nonnegative")
    return int(_rng.next_poisson(rng, mutation_rate * branch_length))


@dataclass
class MonteCarloResult:
    config: SimulationConfig
    collisions: np.ndarray
    absorption_time: np.ndarray
    branch_length: np.ndarray
    segregating_sites: Optional[np.ndarray]
    paths: Optional[list] = None
    summary: dict = field(default_factory=dict)

    def __len__(self):
        return self.collisions.size

    def samples(self) -> Iterator[FunctionalSample]:
        n = self.config.n
        for i in range(len(self)):
            m = None if self.segregating_sites is None else int(self.segregating_sites[i])
            x = int(self.collisions[i])
            path = self.paths[i] if self.paths is not None else None
            yield FunctionalSample(n, x, float(self.absorption_time[i]),
                                   float(self.branch_length[i]), m, x + 1, path)


def _block(args):
    n, a, b, rate, seed, start, count = args
    params = CoalescentParams(a, b)
    lam, p1 = _tables(n, params)
    xs = np.empty(count, dtype=np.int64)
    taus = np.empty(count)
    ls = np.empty(count)
    ms = np.empty(count, dtype=np.int64)
    _run_block(n, a, b, lam, p1, rate, np.uint64(seed), start, count, xs, taus, ls, ms)
    return xs, taus, ls, ms


def monte_carlo(config: SimulationConfig, workers: int = 1) -> MonteCarloResult:
    """Simulate ``config.replicates`` independent paths.

    Replicate ``i`` always uses stream ``i`` of ``config.master_seed``; the
    worker count changes wall time only.
    """
    p = config.params
    rate = -1.0 if p.mutation_rate is None else float(p.mutation_rate)
    if config.record_paths:
        return _monte_carlo_paths(config, rate)
    jobs = [(config.n, p.a, p.b, rate, config.master_seed, s, min(BLOCK, config.replicates - s))
            for s in range(0, config.replicates, BLOCK)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block, jobs))
    else:
        parts = [_block(job) for job in jobs]
    xs, taus, ls, ms = (np.concatenate(col) for col in zip(*parts))
    seg = ms if rate >= 0 else None
    return _finish(config, xs, taus, ls, seg, None)


def _monte_carlo_paths(config: SimulationConfig, rate: float) -> MonteCarloResult:
    p = config.params
    lam, p1 = _tables(config.n, p)
    r = config.replicates
    xs = np.empty(r, dtype=np.int64)
    taus = np.empty(r)
    ls = np.empty(r)
    ms = np.empty(r, dtype=np.int64)
    paths = []
    buf = np.zeros(config.n, dtype=np.int64)
    for i in range(r):
        state = _rng.rng_stream(config.master_seed, i)
        x, tau, length = _path(config.n, p.a, p.b, lam, p1, state, buf)
        xs[i], taus[i], ls[i] = x, tau, length
        ms[i] = _rng.next_poisson(state, rate * length) if rate >= 0 else -1
        paths.append(tuple(int(s) for s in buf[: x + 1]))
    return _finish(config, xs, taus, ls, ms if rate >= 0 else None, paths)


def _finish(config, xs, taus, ls, seg, paths) -> MonteCarloResult:
    summary = {
        "X": RunningSummary.of(xs),
        "tau": RunningSummary.of(taus),
        "L": RunningSummary.of(ls),
    }
    if seg is not None:
        summary["M"] = RunningSummary.of(seg)
    return MonteCarloResult(config, xs, taus, ls, seg, paths, summary)


def write_samples_csv(result: MonteCarloResult, fp: TextIO) -> None:
    """Raw samples as ``replicate,n,a,b,X,tau,L,M``; M is empty without a mutation rate."""
    cfg = result.config
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    a, b = repr(float(cfg.params.a)), repr(float(cfg.params.b))
    seg = result.segregating_sites
    for i in range(len(result)):
        writer.writerow((
            i, cfg.n, a, b, int(result.collisions[i]),
            repr(float(result.absorption_time[i])), repr(float(result.branch_length[i])),
            "" if seg is None else int(seg[i]),
        ))
