"""Probability distances: chi_T between characteristic functions, Wasserstein
d_q on finitely supported laws, empirical d_1 and Kolmogorov-Smirnov."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import ResourceCapError
from .exact import DiscreteLaw

LP_SUPPORT_CAP = 512


@dataclass(frozen=True)
class EmpiricalSample:
    values: np.ndarray

    def __post_init__(self):
        if self.values.size < 1:
            raise ValueError("empirical sample must be nonempty")

    @classmethod
    def of(cls, values) -> "EmpiricalSample":
        return cls(np.sort(np.asarray(values, dtype=float)))

    @property
    def count(self) -> int:
        return self.values.size


def empirical_cf(sample, t, chunk: int = 1 << 16) -> np.ndarray:
    """Mean of exp(i t X) over the sample, for each t."""
    x = np.asarray(sample.values if isinstance(sample, EmpiricalSample) else sample, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(t.size, dtype=complex)
    for start in range(0, x.size, chunk):
        block = x[start : start + chunk]
        phase = np.outer(t, block)
        out += np.cos(phase).sum(axis=1) + 1j * np.sin(phase).sum(axis=1)
    return out / x.size


def law_cf(law: DiscreteLaw, t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.exp(1j * np.outer(t, law.support.astype(float))) @ law.probs


def _as_cf(obj) -> Callable:
    if isinstance(obj, DiscreteLaw):
        return lambda t: law_cf(obj, t)
    if isinstance(obj, EmpiricalSample):
        return lambda t: empirical_cf(obj, t)
    if callable(obj):
        return lambda t: np.atleast_1d(np.asarray(obj(np.asarray(t, dtype=float)), dtype=complex))
    values = np.asarray(obj, dtype=float)
    if values.size == 0:
        raise ValueError("empty sample")
    return lambda t: empirical_cf(values, t)


def chi_T(sample_or_law, reference_cf, T: float, grid_points: int = 2048,
          refine_tol: float = 1e-9) -> float:
    """sup_{|t| <= T} |phi_1(t) - phi_2(t)| by grid search plus golden-section refinement.

    Both arguments may be an :class:`EmpiricalSample`, a raw array, a
    :class:`DiscreteLaw`, or a callable cf. Characteristic functions are
    Hermitian, so only t in [0, T] is scanned.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if grid_points < 3:
        raise ValueError("grid_points must be >= 3")
    if isinstance(sample_or_law, (list, tuple, np.ndarray)) and len(sample_or_law) == 0:
        raise ValueError("empty sample")
    f = _as_cf(sample_or_law)
    g = _as_cf(reference_cf)

    def gap(t):
        return np.abs(f(t) - g(t))

    grid = np.linspace(0.0, T, grid_points)
    vals = gap(grid)
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid_points - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda t: -float(gap(t)[0]), bounds=(lo, hi),
                                       method="bounded", options={"xatol": refine_tol})
        best = max(best, -float(res.fun))
    return best


def wasserstein_1_cdf(p: DiscreteLaw, q: DiscreteLaw) -> float:
    """d_1 as the integral of |F_P - F_Q| over the merged support."""
    grid = np.union1d(p.support, q.support).astype(float)
    fp = np.cumsum(np.bincount(np.searchsorted(grid, p.support), weights=p.probs, minlength=grid.size))
    fq = np.cumsum(np.bincount(np.searchsorted(grid, q.support), weights=q.probs, minlength=grid.size))
    return math.fsum(np.abs(fp - fq)[:-1] * np.diff(grid))


def wasserstein_lp(p: DiscreteLaw, q: DiscreteLaw, exponent: float) -> float:
    """Optimal transport cost with cost |x - y|^exponent, solved as a linear program."""
    xs = p.support.astype(float)
    ys = q.support.astype(float)
    nx, ny = xs.size, ys.size
    cost = np.abs(xs[:, None] - ys[None, :]) ** exponent
    rows = np.zeros((nx, nx * ny))
    for i in range(nx):
        rows[i, i * ny : (i + 1) * ny] = 1.0
    cols = np.zeros((ny, nx * ny))
    for j in range(ny):
        cols[j, j::ny] = 1.0
    res = optimize.linprog(
        cost.ravel(),
        A_eq=np.vstack([rows, cols]),
        b_eq=np.concatenate([p.probs, q.probs / q.probs.sum() * p.probs.sum()]),
        bounds=(0, None),
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return max(float(res.fun), 0.0)


def wasserstein_q_discrete(p: DiscreteLaw, q: DiscreteLaw, exponent: float = 1.0) -> float:
    """Wasserstein distance d_q = inf E|X - Y|^q over couplings, 0 < q <= 1.

    For q = 1 the monotone coupling is optimal and the CDF formula is exact.
    For q < 1 the cost is concave and the transport LP is solved instead.
    """
    if not 0 < exponent <= 1:
        raise ValueError(f"q must lie in (0, 1], got {exponent}")
    if exponent == 1.0:
        return wasserstein_1_cdf(p, q)
    if np.union1d(p.support, q.support).size > LP_SUPPORT_CAP:
        raise ResourceCapError(f"combined support exceeds {LP_SUPPORT_CAP} atoms for q < 1")
    return wasserstein_lp(p, q, exponent)


def wasserstein_1_empirical(a: EmpiricalSample, b: EmpiricalSample) -> float:
    """Mean absolute gap between matched order statistics (equal sizes)."""
    x = np.sort(np.asarray(a.values, dtype=float))
    y = np.sort(np.asarray(b.values, dtype=float))
    if x.size == 0 or y.size == 0:
        raise ValueError("empty sample")
    if x.size != y.size:
        raise ValueError("samples must have equal counts; trim or resample first")
    return float(np.mean(np.abs(x - y)))


def ks_distance(sample, reference_cdf: Callable) -> float:
    """sup |F_hat - F| over sample points, using both one-sided limits of F_hat.

    The reference CDF is taken to be continuous.
    """
    x = np.sort(np.asarray(sample.values if isinstance(sample, EmpiricalSample) else sample, dtype=float))
    if x.size == 0:
        raise ValueError("empty sample")
    n = x.size
    f = np.asarray(reference_cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max(), 0.0))


def sine_power_sup(exponent: float) -> float:
    """M_q = sup_{u>0} |sin u| u^{-q}."""
    if not 0 < exponent <= 1:
        raise ValueError("q must lie in (0, 1]")
    if exponent == 1.0:
        return 1.0
    res = optimize.minimize_scalar(lambda u: -math.sin(u) * u**-exponent,
                                   bounds=(1e-12, math.pi / 2), method="bounded",
                                   options={"xatol": 1e-12})
    return -float(res.fun)


def chi_wasserstein_bound(T: float, exponent: float) -> float:
    """Constant C with chi_T <= C d_q: 2^{1-q} M_q T^q."""
    return 2 ** (1 - exponent) * sine_power_sup(exponent) * T**exponent
