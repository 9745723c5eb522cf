"""SplitMix64-based deterministic sampling (trainer-side implementation).

Matches the engine's documented stream: state_i = seed + (i+1) * golden
(mod 2^64), mixed with the standard SplitMix64 finalizer; uniforms take the
top 53 bits; Gaussians via Box-Muller on consecutive pairs in flat C order.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _mix(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def splitmix64(seed, n):
    idx = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GOLDEN)


def fold_seed(seed, key):
    with np.errstate(over="ignore"):
        z = (np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
             ^ _mix(np.uint64(key & 0xFFFFFFFFFFFFFFFF) * _GOLDEN + _GOLDEN))
    return int(_mix(z))


def uniform(seed, n):
    return (splitmix64(seed, n) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def uniform_range(seed, shape, low, high):
    n = int(np.prod(shape)) if shape else 1
    return (low + (high - low) * uniform(seed, n)).reshape(shape)


def gaussian(seed, shape):
    n = int(np.prod(shape)) if shape else 1
    pairs = (n + 1) // 2
    u = uniform(seed, 2 * pairs)
    r = np.sqrt(-2.0 * np.log1p(-u[0::2]))
    theta = 2.0 * np.pi * u[1::2]
    g = np.empty(2 * pairs)
    g[0::2] = r * np.cos(theta)
    g[1::2] = r * np.sin(theta)
    return g[:n].reshape(shape)
