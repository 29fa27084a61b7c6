"""Expansion coefficients and predicted asymptotics for the beta(1, b) chain,
with exact evaluation of the sums those expansions approximate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numba
import numpy as np

from .errors import RegimeError
from .exact import _fill_row
from .rates import CoalescentParams, digamma, log_beta_fn, total_rate
from .stable import Regime, centering_scaling


@dataclass(frozen=True)
class ExpansionCoefficients:
    b: float
    kappa: tuple
    m: tuple

    @classmethod
    def compute(cls, b: float, j_max: int) -> "ExpansionCoefficients":
        kappas = tuple(kappa(j, b) for j in range(j_max + 1))
        ms = [0.0]
        for j in range(1, j_max + 1):
            ms.append(ms[-1] + kappas[j] / j)
        return cls(b, kappas, tuple(ms))


@dataclass(frozen=True)
class ExpansionPrediction:
    """Value of an expansion at n; ``error_order`` is a label, never added to ``value``."""

    value: float
    error_order: str
    n: int
    formula: str


def _check_b(b: float) -> None:
    if not b > 0:
        raise RegimeError(f"b must be positive, got {b}")


def kappa(j: int, b: float) -> float:
    """(j+b-1) psi(j+b) + j - (b-1) psi(b)."""
    _check_b(b)
    return (j + b - 1) * digamma(j + b) + j - (b - 1) * digamma(b)


def m_coeff(j: int, b: float) -> float:
    """Second-order moment coefficient m_j = m_{j-1} + kappa_j / j, m_0 = 0."""
    _check_b(b)
    return math.fsum(kappa(l, b) / l for l in range(1, j + 1))


def m_coeff_closed(j: int, b: float) -> float:
    """m_j = 2j + sum_{i<j} psi(b+i) (H_j - H_i)."""
    _check_b(b)
    terms = [2.0 * j]
    for i in range(j):
        tail = math.fsum(1.0 / l for l in range(i + 1, j + 1))
        terms.append(digamma(b + i) * tail)
    return math.fsum(terms)


def c_coeff(b: float, alpha: float, p: float) -> float:
    """c_{b,alpha,p} = (alpha+b-1) psi(alpha+b) + p - (b-1) psi(b)."""
    _check_b(b)
    if not alpha + b - 1 > 0:
        raise RegimeError(f"c_coeff needs alpha + b - 1 > 0, got alpha={alpha}, b={b}")
    return (alpha + b - 1) * digamma(alpha + b) + p - (b - 1) * digamma(b)


def c_coeff_alt(b: float, alpha: float, p: float) -> float:
    """The equivalent form (alpha+b-1) psi(alpha+b-1) + p + 1 + (1-b) psi(b)."""
    _check_b(b)
    if not alpha + b - 1 > 0:
        raise RegimeError(f"c_coeff needs alpha + b - 1 > 0, got alpha={alpha}, b={b}")
    return (alpha + b - 1) * digamma(alpha + b - 1) + p + 1 + (1 - b) * digamma(b)


def inversion_lhs_regrouped(j: int, b: float) -> float:
    """sum_i C(j,i) (-1)^{j-i} m_i with the binomial sums done exactly.

    Each m_i is a combination of 2i and psi(b+k) with rational weights, so
    the alternating sum is regrouped per psi(b+k) with exact Fraction
    coefficients before any floating-point arithmetic.
    """
    coef = [Fraction(0)] * j
    const = Fraction(0)
    for i in range(j + 1):
        sign = math.comb(j, i) * (-1) ** (j - i)
        const += sign * 2 * i
        for k in range(i):
            coef[k] += sign * sum(Fraction(1, l) for l in range(k + 1, i + 1))
    terms = [float(const)] + [float(c) * digamma(b + k) for k, c in enumerate(coef) if c != 0]
    return math.fsum(terms)


def inversion_lhs(j: int, b: float) -> float:
    """sum_i C(j,i) (-1)^{j-i} m_i on the recursively computed m_i, compensated."""
    ms = ExpansionCoefficients.compute(b, j).m
    return math.fsum(math.comb(j, i) * (-1) ** (j - i) * ms[i] for i in range(j + 1))


def inversion_rhs(j: int, b: float) -> float:
    """(-1)^j Be(b, j-1) / j."""
    return (-1) ** j * math.exp(log_beta_fn(b, j - 1)) / j


def inversion_residual(j: int, b: float) -> float:
    if j < 2:
        raise ValueError("inversion formula holds for j >= 2")
    _check_b(b)
    return abs(inversion_lhs(j, b) - inversion_rhs(j, b))




def _pred(value, n, order, formula):
    return ExpansionPrediction(float(value), order, int(n), formula)


def predict_moment_X(n: int, j: int, b: float) -> ExpansionPrediction:
    """n^j / log^j n (1 + m_j / log n)."""
    if n < 3:
        raise ValueError("n must be >= 3")
    if j == 0:
        return _pred(1.0, n, "exact", "moment_X")
    ln = math.log(n)
    value = (n / ln) ** j * (1 + m_coeff(j, b) / ln)
    return _pred(value, n, f"O(n^{j}/log^{j + 2} n)", "moment_X")


def predict_moment_L(n: int, j: int, b: float) -> ExpansionPrediction:
    x = predict_moment_X(n, j, b)
    return _pred(x.value / b**j, n, x.error_order, "moment_L")


def predict_central_moment(n: int, j: int, b: float, functional: str = "X") -> ExpansionPrediction:
    """(-1)^j Be(b, j-1)/j n^j/log^{j+1} n, divided by b^j for L."""
    if j < 2:
        raise ValueError("central-moment expansion needs j >= 2")
    if n < 3:
        raise ValueError("n must be >= 3")
    _check_b(b)
    ln = math.log(n)
    value = inversion_rhs(j, b) * n**j / ln ** (j + 1)
    if functional == "L":
        value /= b**j
    elif functional != "X":
        raise ValueError(f"functional must be X or L, got {functional}")
    return _pred(value, n, f"O(n^{j}/log^{j + 2} n)", f"central_moment_{functional}")


def total_rate_expansion(n: int, b: float) -> float:
    """bn - b(b-1) log n - b + b(b-1) psi(b)."""
    return b * n - b * (b - 1) * math.log(n) - b + b * (b - 1) * digamma(b)


def inverse_total_rate_expansion(n: int, b: float) -> float:
    """(1/(bn)) (1 + (b-1) log n / n + (1 - (b-1) psi(b)) / n)."""
    return (1 + (b - 1) * math.log(n) / n + (1 - (b - 1) * digamma(b)) / n) / (b * n)


def weighted_sum_exact(n: int, alpha: float, p: float) -> float:
    """sum_{m=2}^{n-1} m^alpha / ((n-m)(n-m+1) log^p m), compensated."""
    if n < 4:
        raise ValueError("n must be >= 4")
    m = np.arange(2, n, dtype=float)
    terms = m**alpha / ((n - m) * (n - m + 1) * np.log(m) ** p)
    return math.fsum(terms)


def weighted_sum_prediction(n: int, alpha: float, p: float) -> float:
    """n^alpha/log^p n (1 - alpha log n / n + (alpha psi(alpha) + p)/n)."""
    if not alpha > 0:
        raise RegimeError("sharp expansion needs alpha > 0")
    ln = math.log(n)
    return n**alpha / ln**p * (1 - alpha * ln / n + (alpha * digamma(alpha) + p) / n)


@numba.njit(cache=True)
def _decrement_sum(n, b, alpha, p):
    w = np.zeros(n)
    total = _fill_row(n, 1.0, b, -math.log(b), w)
    acc = 0.0
    c = 0.0
    for k in range(1, n - 1):
        m = n - k
        y = w[k] * m**alpha / math.log(m) ** p - c
        t = acc + y
        c = (t - acc) - y
        acc = t
    return acc / total


def decrement_weighted_sum_exact(n: int, alpha: float, p: float, b: float) -> float:
    """sum_{m=2}^{n-1} p_{n,m} m^alpha / log^p m for the beta(1, b) chain."""
    _check_b(b)
    if n < 4:
        raise ValueError("n must be >= 4")
    if not alpha + b - 1 > 0:
        raise RegimeError("needs alpha + b - 1 > 0")
    return float(_decrement_sum(int(n), float(b), float(alpha), float(p)))


def decrement_weighted_sum_prediction(n: int, alpha: float, p: float, b: float) -> float:
    ln = math.log(n)
    return n**alpha / ln**p * (1 - alpha * ln / n + c_coeff(b, alpha, p) / n)


def weighted_sum_residual(n: int, alpha: float, p: float) -> float:
    """(exact / (n^alpha/log^p n) - 1 + alpha log n/n - (alpha psi(alpha)+p)/n) n log n."""
    ln = math.log(n)
    ratio = weighted_sum_exact(n, alpha, p) / (n**alpha / ln**p)
    return (ratio - 1 + alpha * ln / n - (alpha * digamma(alpha) + p) / n) * n * ln


def decrement_weighted_sum_residual(n: int, alpha: float, p: float, b: float) -> float:
    ln = math.log(n)
    ratio = decrement_weighted_sum_exact(n, alpha, p, b) / (n**alpha / ln**p)
    return (ratio - 1 + alpha * ln / n - c_coeff(b, alpha, p) / n) * n * ln


def total_rate_residual(n: int, b: float) -> float:
    """|lambda_n - expansion| * n."""
    return abs(total_rate(n, CoalescentParams(1.0, b)) - total_rate_expansion(n, b)) * n


def inverse_total_rate_residual(n: int, b: float) -> float:
    """|1/lambda_n - expansion| * n^3 / log^2 n."""
    lam = total_rate(n, CoalescentParams(1.0, b))
    return abs(1 / lam - inverse_total_rate_expansion(n, b)) * n**3 / math.log(n) ** 2


def centering_sequence(n: int, params: CoalescentParams, regime: Regime | str) -> tuple[float, float]:
    """(a_n, b_n) of the limit theorem for the given regime; a > 1 is out of scope."""
    if params.a > 1:
        raise RegimeError(f"a={params.a} > 1 rows are out of scope")
    return centering_scaling(n, params, regime)


def bounded_ratio(values) -> float:
    """max |v| over the upper half of a grid divided by the median |v| over the grid."""
    v = np.abs(np.asarray(values, dtype=float))
    upper = v[len(v) // 2 :]
    return float(upper.max() / np.median(v))
