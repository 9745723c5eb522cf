"""Deterministic, implementation-portable random number generation.

Everything stochastic in this package draws from SplitMix64, a public
counter-based generator with 64-bit state:

    state_i = seed + (i + 1) * 0x9E3779B97F4A7C15        (mod 2^64)
    z = state_i
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9             (mod 2^64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB             (mod 2^64)
    out_i = z ^ (z >> 31)

Uniform doubles take the top 53 bits: u_i = (out_i >> 11) * 2^-53, giving
values in [0, 1). Gaussians use the Box-Muller transform on consecutive
uniform pairs (u1, u2):

    r = sqrt(-2 * ln(1 - u1)),  g0 = r * cos(2*pi*u2),  g1 = r * sin(2*pi*u2)

drawn in flat C order over the requested shape. The algorithm is spelled out
here so an independent implementation can reproduce byte-identical streams.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)


def _mix(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def splitmix64(seed, n):
    """Return the first `n` SplitMix64 outputs for `seed` as uint64."""
    idx = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = (np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GOLDEN) & _MASK
        return _mix(state)


def fold_seed(seed, key):
    """Derive a child seed from (seed, key); used for independent substreams."""
    with np.errstate(over="ignore"):
        z = (np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
             ^ _mix(np.uint64(key & 0xFFFFFFFFFFFFFFFF) * _GOLDEN + _GOLDEN))
    return int(_mix(z))


def uniform(seed, n):
    """n uniform float64 samples in [0, 1)."""
    return (splitmix64(seed, n) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def gaussian(seed, shape):
    """Standard-normal float64 samples of the given shape (Box-Muller)."""
    n = int(np.prod(shape)) if shape else 1
    pairs = (n + 1) // 2
    u = uniform(seed, 2 * pairs)
    u1, u2 = u[0::2], u[1::2]
    r = np.sqrt(-2.0 * np.log1p(-u1))
    theta = 2.0 * np.pi * u2
    g = np.empty(2 * pairs, dtype=np.float64)
    g[0::2] = r * np.cos(theta)
    g[1::2] = r * np.sin(theta)
    return g[:n].reshape(shape)


def uniform_range(seed, shape, low, high):
    """Uniform float64 samples in [low, high)."""
    n = int(np.prod(shape)) if shape else 1
    return (low + (high - low) * uniform(seed, n)).reshape(shape)
