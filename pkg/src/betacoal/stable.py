"""Spectrally negative stable limit laws and the normalizations of the
collision count, branch length and segregating-site limit theorems.

The target laws are fixed by their characteristic functions

    S_alpha (1 < alpha < 2):  exp{|z|^alpha (cos(pi alpha/2) + i sin(pi alpha/2) sgn z)}
    S_1:                      exp{-|z| (pi/2 - i log|z| sgn z)}

In the usual S(alpha, beta, sigma, mu) parametrization (Samorodnitsky-Taqqu)
both have beta = -1 and mu = 0, with sigma^alpha = -cos(pi alpha/2) and
sigma = pi/2 respectively; the sampler relies on that correspondence.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

from .errors import RegimeError
from .rates import CoalescentParams


class Regime(str, Enum):
    X_A_LT_1 = "X_a_lt_1"
    X_A_EQ_1 = "X_a_eq_1"
    L_A_EQ_1 = "L_a_eq_1"
    M_A_EQ_1 = "M_a_eq_1"


@dataclass(frozen=True)
class StableSpec:
    alpha: float

    def __post_init__(self):
        if not (self.alpha == 1.0 or 1.0 < self.alpha < 2.0):
            raise ValueError(f"alpha must be 1 or lie in (1, 2), got {self.alpha}")

    @property
    def form(self) -> str:
        return "one_stable" if self.alpha == 1.0 else "alpha_stable"

    @property
    def scale(self) -> float:
        if self.alpha == 1.0:
            return math.pi / 2
        return (-math.cos(math.pi * self.alpha / 2)) ** (1.0 / self.alpha)


def stable_cf(spec: StableSpec, z):
    """Characteristic function of the limit law, vectorized over z."""
    z = np.asarray(z, dtype=float)
    az = np.abs(z)
    sgn = np.sign(z)
    if spec.alpha == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            logz = np.where(az > 0, np.log(np.where(az > 0, az, 1.0)), 0.0)
        expo = -az * (math.pi / 2) + 1j * az * logz * sgn
    else:
        h = math.pi * spec.alpha / 2
        expo = az**spec.alpha * (math.cos(h) + 1j * math.sin(h) * sgn)
    out = np.exp(expo)
    return complex(out) if out.ndim == 0 else out


def sample_stable(spec: StableSpec, rng: np.random.Generator, size=None):
    """Chambers-Mallows-Stuck draws with beta = -1, scaled to match :func:`stable_cf`."""
    alpha = spec.alpha
    beta = -1.0
    sigma = spec.scale
    v = rng.uniform(-math.pi / 2, math.pi / 2, size)
    w = rng.standard_exponential(size)
    if alpha == 1.0:
        half = math.pi / 2
        x = (1 / half) * ((half + beta * v) * np.tan(v)
                          - beta * np.log(half * w * np.cos(v) / (half + beta * v)))
        return sigma * x + (2 / math.pi) * beta * sigma * math.log(sigma)
    t = beta * math.tan(math.pi * alpha / 2)
    shift = math.atan(t) / alpha
    factor = (1 + t * t) ** (1 / (2 * alpha))
    x = (factor * np.sin(alpha * (v + shift)) / np.cos(v) ** (1 / alpha)
         * (np.cos(v - alpha * (v + shift)) / w) ** ((1 - alpha) / alpha))
    return sigma * x


def stable_cdf(spec: StableSpec, x: float, tol: float = 1e-6) -> float:
    """CDF by Gil-Pelaez inversion: F(x) = 1/2 - (1/pi) int_0^inf Im(e^{-itx} phi(t))/t dt."""

    def integrand(t):
        if t == 0.0:
            return 0.0
        return (np.exp(-1j * t * x) * stable_cf(spec, t)).imag / t

    # the cf decays like exp(-c t^alpha); 60/c^(1/alpha) is far into the tail
    upper = 60.0 / spec.scale
    # split at t = 1 to isolate the t log t behaviour near the origin when alpha = 1;
    # quad's roundoff flag is replaced by a check on its own error estimate
    val = 0.0
    for lo, hi in ((0.0, 1.0), (1.0, upper)):
        part, err, *_ = integrate.quad(integrand, lo, hi, limit=500, epsabs=tol * 1e-2,
                                       epsrel=tol * 1e-2, full_output=1)
        if err > tol:
            warnings.warn(f"stable_cdf({x}) integration error {err:.2e} exceeds {tol:.0e}")
        val += part
    return float(min(1.0, max(0.0, 0.5 - val / math.pi)))


class StableCDF:
    """Callable CDF tabulated on a grid and interpolated; cheap for KS tests."""

    def __init__(self, spec: StableSpec, lo: float = -40.0, hi: float = 20.0, points: int = 1201):
        self.spec = spec
        self.grid = np.linspace(lo, hi, points)
        self.values = np.maximum.accumulate(np.array([stable_cdf(spec, x) for x in self.grid]))

    def __call__(self, x):
        return np.interp(x, self.grid, self.values, left=0.0, right=1.0)


def limit_spec(params: CoalescentParams) -> StableSpec:
    """Limit law of the normalized collision count for 0 < a <= 1."""
    params.require_limit_regime()
    return StableSpec(2.0 - params.a)


def regime_for(params: CoalescentParams, functional: str = "X") -> Regime:
    params.require_limit_regime()
    if functional == "X":
        return Regime.X_A_LT_1 if params.a < 1 else Regime.X_A_EQ_1
    if params.a != 1.0:
        raise RegimeError(f"no limit theorem for {functional} with a={params.a} in scope")
    return {"L": Regime.L_A_EQ_1, "M": Regime.M_A_EQ_1}[functional]


def centering_scaling(n: int, params: CoalescentParams, regime: Regime | str) -> tuple[float, float]:
    """Centering a_n and scaling b_n with (F_n - a_n)/b_n converging to the limit."""
    regime = Regime(regime)
    params.require_limit_regime()
    a = params.a
    if regime is Regime.X_A_LT_1:
        if a >= 1:
            raise RegimeError("X_a_lt_1 needs a < 1")
        if n < 2:
            raise ValueError("n must be >= 2")
        return (1 - a) * n, (1 - a) * n ** (1 / (2 - a))
    if a != 1.0:
        raise RegimeError(f"{regime.value} needs a = 1, got a={a}")
    if n < 3:
        raise ValueError("a = 1 normalizations need n >= 3 (log log n)")
    ln = math.log(n)
    center = n / ln + n * math.log(ln) / ln**2
    scale = n / ln**2
    if regime is Regime.X_A_EQ_1:
        return center, scale
    factor = 1.0 / params.b
    if regime is Regime.M_A_EQ_1:
        if not params.mutation_rate:
            raise RegimeError("M_a_eq_1 needs a positive mutation rate")
        factor *= params.mutation_rate
    return factor * center, factor * scale


def normalize(value, n: int, params: CoalescentParams, regime: Regime | str):
    center, scale = centering_scaling(n, params, regime)
    return (np.asarray(value, dtype=float) - center) / scale
