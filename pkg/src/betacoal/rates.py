"""Transition rates of the beta(a, b)-coalescent block-counting chain.

All Beta/Gamma ratios are evaluated as differences of log-gamma values and
exponentiated last, so nothing overflows for states up to ~1e6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np
from scipy.special import gammaln

from .errors import RegimeError, ResourceCapError

DENSE_CAP = 20_000

# Bernoulli-number coefficients B_{2k}/(2k) of the digamma asymptotic series.
_DIGAMMA_SERIES = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
)


@dataclass(frozen=True)
class CoalescentParams:
    """Beta shape parameters (a, b) and an optional mutation rate r."""

    a: float
    b: float
    mutation_rate: Optional[float] = None

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError(f"a must be positive, got {self.a}")
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ValueError(f"b must be positive, got {self.b}")
        if self.mutation_rate is not None and not self.mutation_rate >= 0:
            raise ValueError(f"mutation_rate must be >= 0, got {self.mutation_rate}")

    @property
    def log_beta(self) -> float:
        return math.lgamma(self.a) + math.lgamma(self.b) - math.lgamma(self.a + self.b)

    def require_limit_regime(self) -> None:
        """Raise RegimeError unless 0 < a <= 1."""
        if not 0 < self.a <= 1:
            raise RegimeError(f"operation requires a in (0, 1], got a={self.a}")


def log_gamma(x: float) -> float:
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def digamma(x: float) -> float:
    """Logarithmic derivative of the gamma function for x > 0.

    Shifts the argument upward past 10 with psi(x) = psi(x + 1) - 1/x and
    then sums eight terms of the asymptotic series.
    """
    if not x > 0:
        raise ValueError(f"digamma requires x > 0, got {x}")
    shift = []
    while x < 10.0:
        shift.append(1.0 / x)
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for coef in _DIGAMMA_SERIES:
        series += coef * power
        power *= inv2
    return math.fsum([math.log(x), -0.5 / x, -series] + [-s for s in shift])


def log_beta_fn(x: float, y: float) -> float:
    return math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y)


def collision_rate(n: int, k: int, params: CoalescentParams) -> float:
    """Rate lambda_{n,k} at which a given k-tuple of n particles merges."""
    if n < 2 or not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got n={n}, k={k}")
    return math.exp(log_beta_fn(params.a + k - 2, n - k + params.b) - params.log_beta)


def _log_decrement_weights(n: int, params: CoalescentParams) -> np.ndarray:
    # log of C(n, k+1) * lambda_{n,k+1} for k = 1..n-1
    k = np.arange(1, n, dtype=float)
    a, b = params.a, params.b
    return (
        gammaln(n + 1.0)
        - gammaln(k + 2.0)
        - gammaln(n - k)
        + gammaln(a + k - 1.0)
        + gammaln(n - k + b - 1.0)
        - gammaln(n + a + b - 2.0)
        - params.log_beta
    )


def total_rate(n: int, params: CoalescentParams) -> float:
    """Total jump rate lambda_n out of state n.

    For a = 1 the closed form b * sum_{k<n} k/(b+k-1) is used; otherwise the
    defining sum over merger sizes.
    """
    if n < 2:
        raise ValueError(f"total_rate requires n >= 2, got {n}")
    if params.a == 1.0:
        b = params.b
        return b * math.fsum(k / (b + k - 1.0) for k in range(1, n))
    return math.fsum(np.exp(_log_decrement_weights(n, params)))


def total_rate_generic(n: int, params: CoalescentParams) -> float:
    """lambda_n as the plain sum of C(n,k) lambda_{n,k}, for any a."""
    if n < 2:
        raise ValueError(f"total_rate requires n >= 2, got {n}")
    return math.fsum(np.exp(_log_decrement_weights(n, params)))


def total_rate_digamma_form(n: int, b: float) -> float:
    """b(n-1) - b(b-1)(psi(n+b-1) - psi(b)), the a = 1 total rate."""
    return b * (n - 1) - b * (b - 1.0) * (digamma(n + b - 1.0) - digamma(b))


@numba.njit(cache=True)
def _rate_tables(n_max, a, b, log_beta):
    # lambda_{m+1} - lambda_m = m * Be(a, b+m-1)/Be(a,b); Kahan-compensated.
    lam = np.zeros(n_max + 1)
    p1 = np.zeros(n_max + 1)
    s = 0.0
    c = 0.0
    for m in range(1, n_max):
        inc = m * math.exp(math.lgamma(a) + math.lgamma(b + m - 1.0)
                           - math.lgamma(a + b + m - 1.0) - log_beta)
        y = inc - c
        t = s + y
        c = (t - s) - y
        s = t
        lam[m + 1] = s
    for m in range(2, n_max + 1):
        log_w1 = (math.log(m * (m - 1) / 2.0) + math.lgamma(a) + math.lgamma(m + b - 2.0)
                  - math.lgamma(m + a + b - 2.0) - log_beta)
        p1[m] = math.exp(log_w1 - math.log(lam[m]))
    return lam, p1


def rate_tables(n_max: int, params: CoalescentParams) -> tuple[np.ndarray, np.ndarray]:
    """Arrays (lambda_m, P{I_m = 1}) indexed by state m = 0..n_max.

    Built in O(n_max) from the increment identity for total rates; entries
    for m < 2 are zero.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    lam, p1 = _rate_tables(int(n_max), float(params.a), float(params.b), params.log_beta)
    return lam, p1


@numba.njit(cache=True)
def _decrement_row(m, a, b, w1, out):
    """Fill out[k] (k = 1..m-1) with weights proportional to P{I_m = k},
    starting from out[1] = w1, by the consecutive-ratio recurrence."""
    w = w1
    out[1] = w
    for k in range(1, m - 1):
        w *= (m - k - 1.0) * (a + k - 1.0) / ((k + 2.0) * (m - k + b - 2.0))
        out[k + 1] = w


@dataclass(frozen=True)
class DecrementLaw:
    """Law of the first decrement I_n, supported on 1..n-1.

    ``probs[k-1]`` is P{I_n = k}. The dense vector exists only for
    n <= cap; larger states answer :meth:`prob` on demand.
    """

    n: int
    params: CoalescentParams
    cap: int = DENSE_CAP
    _probs: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def probs(self) -> np.ndarray:
        if self._probs is None:
            raise ResourceCapError(f"dense decrement law not stored for n={self.n} > cap={self.cap}")
        return self._probs

    @property
    def support(self) -> np.ndarray:
        return np.arange(1, self.n)

    def prob(self, k: int) -> float:
        if not 1 <= k <= self.n - 1:
            return 0.0
        if self._probs is not None:
            return float(self._probs[k - 1])
        a, b, n = self.params.a, self.params.b, self.n
        log_w = (
            math.lgamma(n + 1.0) - math.lgamma(k + 2.0) - math.lgamma(n - k)
            + math.lgamma(a + k - 1.0) + math.lgamma(n - k + b - 1.0)
            - math.lgamma(n + a + b - 2.0) - self.params.log_beta
        )
        return math.exp(log_w) / total_rate(n, self.params)

    def mean(self) -> float:
        return math.fsum(self.support * self.probs)


def decrement_law(n: int, params: CoalescentParams, cap: int = DENSE_CAP) -> DecrementLaw:
    if n < 2:
        raise ValueError(f"decrement_law requires n >= 2, got {n}")
    if n > cap:
        return DecrementLaw(n, params, cap)
    w = np.exp(_log_decrement_weights(n, params))
    probs = w / math.fsum(w)
    probs.setflags(write=False)
    return DecrementLaw(n, params, cap, probs)


def limit_step_pmf(params: CoalescentParams, k) -> float | np.ndarray:
    """p_k = (2-a) Gamma(k+a-1) / (Gamma(a) (k+1)!), the n -> inf decrement law."""
    params.require_limit_regime()
    a = params.a
    kk = np.asarray(k, dtype=float)
    if np.any(kk < 1):
        raise ValueError("k must be >= 1")
    out = np.exp(math.log(2.0 - a) + gammaln(kk + a - 1.0) - gammaln(a) - gammaln(kk + 2.0))
    return float(out) if out.ndim == 0 else out


def limit_step_tail(params: CoalescentParams, k) -> float | np.ndarray:
    """P{xi >= k} = Gamma(k+a-1) / (Gamma(a) k!), which telescopes against p_k."""
    params.require_limit_regime()
    a = params.a
    kk = np.asarray(k, dtype=float)
    out = np.where(kk <= 1, 1.0,
                   np.exp(gammaln(np.maximum(kk, 1.0) + a - 1.0) - gammaln(a)
                          - gammaln(np.maximum(kk, 1.0) + 1.0)))
    return float(out) if out.ndim == 0 else out


class LimitStepLaw:
    """Limiting step law of the renewal approximation, with a cached CDF prefix."""

    def __init__(self, params: CoalescentParams, horizon: int = 4096):
        params.require_limit_regime()
        self.params = params
        self.a = params.a
        self.horizon = int(horizon)
        self._pmf = limit_step_pmf(params, np.arange(1, self.horizon + 1))
        self._cdf = np.cumsum(self._pmf)

    def pmf(self, k):
        return limit_step_pmf(self.params, k)

    def cdf(self, k: int) -> float:
        if k < 1:
            return 0.0
        if k <= self.horizon:
            return float(self._cdf[k - 1])
        return 1.0 - float(limit_step_tail(self.params, k + 1))

    def tail(self, k: int) -> float:
        """P{xi >= k}."""
        return float(limit_step_tail(self.params, k))


def decrement_deviation(n: int, q: float, params: CoalescentParams) -> float:
    """sum_{k<n} k^q |P{I_n = k} - p_k|, the weighted distance between the
    decrement law and its limit."""
    params.require_limit_regime()
    if not 0 < q <= 1:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    if not q + params.a > 1:
        raise RegimeError(f"bound needs q + a > 1, got q={q}, a={params.a}")
    k = np.arange(1, n, dtype=float)
    diff = np.abs(decrement_law(n, params, cap=max(n, DENSE_CAP)).probs - limit_step_pmf(params, k))
    return math.fsum(k**q * diff)
