"""Counter-based Philox4x32-10 generator usable inside numba kernels.

Every path owns a substream keyed by ``(seed, stream_id, path_index)``: the
seed is the 64-bit key, the counter words are ``(block, stream_id, path lo,
path hi)``. Draws therefore never depend on how paths are scheduled.

A stream is a ``uint64[8]`` state vector plus a ``float64[5]`` buffer::

    state = [k0, k1, block, stream_id, path_lo, path_hi, unused, unused]
    buf   = [uniform_pending, u0, u1, normal_pending, spare_normal]
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)
_TWO_M53 = 2.0**-53


@njit(cache=True, nogil=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """One Philox4x32-10 block. Arguments and results are uint64 holding 32-bit words."""
    for i in range(10):
        if i > 0:
            k0 = (k0 + _W0) & _MASK
            k1 = (k1 + _W1) & _MASK
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _SHIFT
        lo0 = p0 & _MASK
        hi1 = p1 >> _SHIFT
        lo1 = p1 & _MASK
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
    return c0, c1, c2, c3


@njit(cache=True, nogil=True)
def new_stream(seed, stream_id, path_index):
    state = np.zeros(8, dtype=np.uint64)
    s = np.uint64(seed)
    state[0] = s & _MASK
    state[1] = (s >> _SHIFT) & _MASK
    state[3] = np.uint64(stream_id) & _MASK
    p = np.uint64(path_index)
    state[4] = p & _MASK
    state[5] = (p >> _SHIFT) & _MASK
    buf = np.zeros(5, dtype=np.float64)
    return state, buf


@njit(cache=True, nogil=True)
def uniform(state, buf):
    """Uniform on the open interval (0, 1) with 53 random bits."""
    n = int(buf[0])
    if n == 0:
        r0, r1, r2, r3 = philox4x32(state[2], state[3], state[4], state[5], state[0], state[1])
        state[2] = (state[2] + np.uint64(1)) & _MASK
        a = ((r0 << _SHIFT) | r1) >> np.uint64(11)
        b = ((r2 << _SHIFT) | r3) >> np.uint64(11)
        buf[1] = (float(a) + 0.5) * _TWO_M53
        buf[2] = (float(b) + 0.5) * _TWO_M53
        buf[0] = 1.0
        return buf[1]
    buf[0] = 0.0
    return buf[2]


@njit(cache=True, nogil=True)
def normal(state, buf):
    """Standard normal by Box-Muller; the second variate is kept for the next call."""
    if buf[3] != 0.0:
        buf[3] = 0.0
        return buf[4]
    u1 = uniform(state, buf)
    u2 = uniform(state, buf)
    rad = math.sqrt(-2.0 * math.log(u1))
    buf[3] = 1.0
    buf[4] = rad * math.sin(2.0 * math.pi * u2)
    return rad * math.cos(2.0 * math.pi * u2)


@njit(cache=True, nogil=True)
def exponential(state, buf, rate):
    return -math.log(uniform(state, buf)) / rate


@njit(cache=True, nogil=True)
def inverse_gaussian(state, buf, mean, shape):
    """Michael-Schucany-Haas sampler."""
    nu = normal(state, buf)
    y = nu * nu
    my = mean * y
    x = mean + mean * my / (2.0 * shape) - mean / (2.0 * shape) * math.sqrt(4.0 * mean * shape * y + my * my)
    if uniform(state, buf) <= mean / (mean + x):
        return x
    return mean * mean / x


@njit(cache=True, nogil=True)
def _fill_uniforms(seed, stream_id, path_index, n, out):
    state, buf = new_stream(seed, stream_id, path_index)
    for i in range(n):
        out[i] = uniform(state, buf)


def uniforms(seed: int, stream_id: int, path_index: int, n: int) -> np.ndarray:
    """First ``n`` uniforms of one substream (for inspection and tests)."""
    out = np.empty(n)
    _fill_uniforms(np.uint64(seed), stream_id, path_index, n, out)
    return out


def philox_block(counter, key) -> tuple[int, int, int, int]:
    """Philox4x32-10 on plain Python integers (four counter words, two key words)."""
    c = [np.uint64(v) for v in counter]
    k = [np.uint64(v) for v in key]
    return tuple(int(v) for v in philox4x32(c[0], c[1], c[2], c[3], k[0], k[1]))
