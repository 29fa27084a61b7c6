"""Exact moments and laws of the chain functionals by recursion over states.

Decrement rows are regenerated per state, so memory stays O(n_max * j_max)
for moments; the exact law of X_n needs the O(n^2) table of all smaller laws.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import TextIO

import numba
import numpy as np

from .errors import ResourceCapError
from .rates import CoalescentParams

MOMENT_CAP = 20_000
LAW_CAP = 2_000

_FUNCTIONALS = {"X": 0, "L": 1, "tau": 2, "gap": 3}


@dataclass(frozen=True)
class DiscreteLaw:
    support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        if self.support.shape != self.probs.shape:
            raise ValueError("support and probs differ in shape")
        if self.support.size > 1 and np.any(np.diff(self.support) <= 0):
            raise ValueError("support must be strictly increasing")

    def mean(self) -> float:
        return math.fsum(self.support * self.probs)

    def moment(self, j: int) -> float:
        return math.fsum(self.support.astype(float) ** j * self.probs)

    def central_moment(self, j: int) -> float:
        mu = self.mean()
        return math.fsum((self.support - mu) ** j * self.probs)

    def cdf(self, x: float) -> float:
        return float(self.probs[self.support <= x].sum())

    @classmethod
    def from_dense(cls, probs: np.ndarray, offset: int = 0, trim: bool = True) -> "DiscreteLaw":
        """Law with P{value = offset + i} = probs[i]; zero atoms dropped when ``trim``."""
        support = np.arange(offset, offset + probs.size)
        if trim:
            keep = probs > 0
            return cls(support[keep], probs[keep])
        return cls(support, probs)


@dataclass(frozen=True)
class MomentTable:
    """Raw moments E[F_n^j] for n = 0..n_max, j = 0..j_max (row n = 0 unused)."""

    params: CoalescentParams
    j_max: int
    functional: str
    values: np.ndarray

    @property
    def n_max(self) -> int:
        return self.values.shape[0] - 1

    def moment(self, n: int, j: int) -> float:
        return float(self.values[n, j])

    def write_csv(self, fp: TextIO, n_values=None) -> None:
        """Rows ``n,j,functional,value``."""
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(("n", "j", "functional", "value"))
        ns = range(1, self.n_max + 1) if n_values is None else n_values
        for n in ns:
            for j in range(self.j_max + 1):
                writer.writerow((n, j, self.functional, repr(float(self.values[n, j]))))


@numba.njit(cache=True)
def _fill_row(n, a, b, log_beta, w):
    # unnormalised C(n,k+1) lambda_{n,k+1}, k = 1..n-1; returns their sum lambda_n
    log_w1 = (math.log(n * (n - 1) / 2.0) + math.lgamma(a) + math.lgamma(n + b - 2.0)
              - math.lgamma(n + a + b - 2.0) - log_beta)
    v = math.exp(log_w1)
    w[1] = v
    s = v
    c = 0.0
    for k in range(1, n - 1):
        v *= (n - k - 1.0) * (a + k - 1.0) / ((k + 2.0) * (n - k + b - 2.0))
        w[k + 1] = v
        y = v - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


@numba.njit(cache=True)
def _binomials(j_max):
    c = np.zeros((j_max + 1, j_max + 1))
    for j in range(j_max + 1):
        c[j, 0] = 1.0
        for i in range(1, j + 1):
            c[j, i] = c[j - 1, i - 1] + (c[j - 1, i] if i <= j - 1 else 0.0)
    return c


@numba.njit(cache=True)
def _moments(n_max, j_max, a, b, log_beta, code):
    vals = np.zeros((n_max + 1, j_max + 1))
    lams = np.zeros(n_max + 1)
    binom = _binomials(j_max)
    w = np.zeros(n_max + 1)
    s = np.zeros(j_max + 1)
    hold = np.zeros(j_max + 1)
    vals[1, 0] = 1.0
    for n in range(2, n_max + 1):
        lam = _fill_row(n, a, b, log_beta, w)
        lams[n] = lam
        s[:] = 0.0
        for k in range(1, n):
            p = w[k] / lam
            prev = vals[n - k]
            for i in range(j_max + 1):
                s[i] += p * prev[i]
        # moments of the per-step increment: 1 (X), n T (L), T (tau), b n T - 1 (gap)
        if code == 0:
            for i in range(j_max + 1):
                hold[i] = 1.0
        else:
            mu = 1.0 / lam
            if code == 1:
                mu = n / lam
            elif code == 3:
                mu = b * n / lam
            fact = 1.0
            for i in range(j_max + 1):
                if i > 0:
                    fact *= i
                hold[i] = fact * mu**i
            if code == 3:
                shifted = np.zeros(j_max + 1)
                for i in range(j_max + 1):
                    for l in range(i + 1):
                        shifted[i] += binom[i, l] * hold[l] * (-1.0) ** (i - l)
                hold[:] = shifted
        for j in range(j_max + 1):
            acc = 0.0
            for i in range(j + 1):
                acc += binom[j, i] * hold[i] * s[j - i]
            vals[n, j] = acc
        vals[n, 0] = 1.0  # E F^0; the row sums only match 1 to rounding
    return vals, lams


def _moment_table(n_max: int, j_max: int, params: CoalescentParams, functional: str,
                  cap: int) -> MomentTable:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if j_max < 0:
        raise ValueError("j_max must be >= 0")
    if n_max > cap:
        raise ResourceCapError(f"n_max={n_max} exceeds moment recursion cap {cap}")
    vals, _ = _moments(int(n_max), int(j_max), float(params.a), float(params.b),
                       params.log_beta, _FUNCTIONALS[functional])
    vals.setflags(write=False)
    return MomentTable(params, j_max, functional, vals)


def exact_moments_X(n_max: int, j_max: int, params: CoalescentParams, cap: int = MOMENT_CAP) -> MomentTable:
    """E X_n^j by conditioning on the first decrement: X_n = 1 + X'_{n-I_n}."""
    return _moment_table(n_max, j_max, params, "X", cap)


def exact_moments_L(n_max: int, j_max: int, params: CoalescentParams, cap: int = MOMENT_CAP) -> MomentTable:
    """E L_n^j from L_n = n T_n + L'_{n-I_n} with T_n ~ Exp(lambda_n) independent of I_n."""
    return _moment_table(n_max, j_max, params, "L", cap)


def exact_moments_tau(n_max: int, j_max: int, params: CoalescentParams, cap: int = MOMENT_CAP) -> MomentTable:
    return _moment_table(n_max, j_max, params, "tau", cap)


def exact_moments_gap(n_max: int, j_max: int, params: CoalescentParams, cap: int = MOMENT_CAP) -> MomentTable:
    """Moments of b L_n - X_n, whose second moment controls the branch-length limit."""
    return _moment_table(n_max, j_max, params, "gap", cap)


def exact_mean_tau(n_max: int, params: CoalescentParams, cap: int = MOMENT_CAP) -> np.ndarray:
    """Vector of E tau_n for n = 0..n_max (entries 0 and 1 are zero)."""
    return np.array(exact_moments_tau(n_max, 1, params, cap).values[:, 1])


def total_rates_exact(n_max: int, params: CoalescentParams) -> np.ndarray:
    """lambda_n as row sums of the decrement weights, n = 0..n_max."""
    _, lams = _moments(int(n_max), 0, float(params.a), float(params.b), params.log_beta, 0)
    return lams


@numba.njit(cache=True)
def _laws_X(n_max, a, b, log_beta):
    law = np.zeros((n_max + 1, n_max))
    law[1, 0] = 1.0
    w = np.zeros(n_max + 1)
    for n in range(2, n_max + 1):
        lam = _fill_row(n, a, b, log_beta, w)
        for k in range(1, n):
            p = w[k] / lam
            m = n - k
            src = law[m]
            # X_m <= m - 1 (and X_1 = 0)
            for x in range(0, max(m - 1, 0) + 1):
                law[n, x + 1] += p * src[x]
    return law


def exact_laws_X(n_max: int, params: CoalescentParams, cap: int = LAW_CAP) -> np.ndarray:
    """Matrix whose row m is the dense law of X_m on 0..n_max-1."""
    if n_max > cap:
        raise ResourceCapError(f"n={n_max} exceeds exact-law cap {cap}")
    return _laws_X(int(max(n_max, 1)), float(params.a), float(params.b), params.log_beta)


def exact_law_X(n: int, params: CoalescentParams, cap: int = LAW_CAP) -> DiscreteLaw:
    """Exact law of the number of collisions X_n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return DiscreteLaw(np.array([0]), np.array([1.0]))
    laws = exact_laws_X(n, params, cap)
    return DiscreteLaw(np.arange(1, n), laws[n, 1:n].copy())


def central_moments(table: MomentTable, n: int, j: int) -> float:
    """E(F_n - E F_n)^j from raw moments, summed with exact rounding compensation."""
    if not 0 <= j <= table.j_max:
        raise ValueError(f"j={j} outside table range 0..{table.j_max}")
    if j == 1 and table.j_max >= 1:
        return 0.0
    raw = table.values[n]
    mu = float(raw[1]) if table.j_max >= 1 else 0.0
    terms = [math.comb(j, i) * (-1) ** (j - i) * float(raw[i]) * mu ** (j - i) for i in range(j + 1)]
    return math.fsum(terms)
