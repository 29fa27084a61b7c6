"""SplitMix64 streams usable from numba kernels.

A stream is a length-1 uint64 array holding the counter. Stream ``i`` of a
master seed starts at a hashed offset of (seed, i), so replicate ``i`` sees
the same numbers whatever worker runs it.
"""

import math

import numba
import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO53 = 1.0 / 9007199254740992.0


@numba.njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@numba.njit(cache=True)
def stream_start(seed, index):
    key = _mix(np.uint64(seed) + _GAMMA)
    return _mix(key ^ _mix(np.uint64(index) * _GAMMA + _GAMMA))


@numba.njit(cache=True, inline="always")
def step(st):
    """Advance a scalar counter; returns (new counter, uniform in [0, 1))."""
    st = st + _GAMMA
    return st, float(_mix(st) >> _S11) * _TWO53


@numba.njit(cache=True)
def next_uniform(state):
    """Uniform double in [0, 1) with 53 random bits."""
    st, u = step(state[0])
    state[0] = st
    return u


@numba.njit(cache=True)
def next_exponential(state, rate):
    return -math.log1p(-next_uniform(state)) / rate


@numba.njit(cache=True)
def next_poisson(state, mu):
    """Poisson draw: inversion below mean 30, transformed rejection (PTRS) above."""
    if mu <= 0.0:
        return 0
    if mu < 30.0:
        u = next_uniform(state)
        p = math.exp(-mu)
        cdf = p
        k = 0
        while u > cdf:
            k += 1
            p *= mu / k
            cdf += p
            if p == 0.0 and cdf < u:
                break
        return k
    slam = math.sqrt(mu)
    loglam = math.log(mu)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = next_uniform(state) - 0.5
        v = next_uniform(state)
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + mu + 0.43)
        if us >= 0.07 and v <= vr:
            return int(k)
        if k < 0 or (us < 0.013 and v > us):
            continue
        if (math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)
                <= -mu + k * loglam - math.lgamma(k + 1.0)):
            return int(k)


def rng_stream(seed: int, index: int = 0) -> np.ndarray:
    """Independent stream ``index`` derived from a 64-bit master seed."""
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.array([stream_start(np.uint64(seed), np.uint64(index))], dtype=np.uint64)


@numba.njit(cache=True)
def uniforms(state, size):
    out = np.empty(size)
    for i in range(size):
        out[i] = next_uniform(state)
    return out


@numba.njit(cache=True)
def exponentials(state, size):
    out = np.empty(size)
    for i in range(size):
        out[i] = next_exponential(state, 1.0)
    return out
