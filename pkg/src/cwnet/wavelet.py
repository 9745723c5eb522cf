"""2-D Haar wavelet transform and multi-level wavelet-domain convolution.

One analysis level maps each non-overlapping 2x2 block [[a, b], [c, d]] to

    low   = (a + b + c + d) / 2      horiz = (a - b + c - d) / 2
    vert  = (a + b - c - d) / 2      diag  = (a - b - c + d) / 2

which is orthonormal (the factor 1/2 preserves energy), so the synthesis
step is the exact algebraic inverse. wtconv augments a plain depthwise
convolution with convolutions applied inside a cascade of wavelet levels,
buying a large receptive field for a handful of small kernels.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import OddDimension, ShapeMismatch
from .ops import depthwise_conv2d


@dataclass(frozen=True)
class WaveletSubbands:
    low: np.ndarray
    horiz: np.ndarray
    vert: np.ndarray
    diag: np.ndarray

    def __post_init__(self):
        shapes = {self.low.shape, self.horiz.shape, self.vert.shape, self.diag.shape}
        if len(shapes) != 1:
            raise ShapeMismatch(f"sub-band shapes differ: {shapes}")

    @property
    def shape(self):
        return self.low.shape

    def map(self, fn):
        return WaveletSubbands(fn(self.low), fn(self.horiz), fn(self.vert), fn(self.diag))


def dwt2(x):
    """One orthonormal Haar analysis level; spatial dims must be even."""
    x = np.asarray(x)
    if x.shape[0] % 2 != 0 or x.shape[1] % 2 != 0:
        raise OddDimension(f"dwt2 needs even spatial dims, got {x.shape[:2]}")
    a = x[0::2, 0::2]
    b = x[0::2, 1::2]
    c = x[1::2, 0::2]
    d = x[1::2, 1::2]
    return WaveletSubbands(
        low=((a + b + c + d) * 0.5).astype(x.dtype, copy=False),
        horiz=((a - b + c - d) * 0.5).astype(x.dtype, copy=False),
        vert=((a + b - c - d) * 0.5).astype(x.dtype, copy=False),
        diag=((a - b - c + d) * 0.5).astype(x.dtype, copy=False),
    )


def idwt2(sb):
    """Exact synthesis inverse of dwt2."""
    low, h, v, d = sb.low, sb.horiz, sb.vert, sb.diag
    hh, ww, ch = low.shape
    out = np.empty((2 * hh, 2 * ww, ch), dtype=low.dtype)
    out[0::2, 0::2] = (low + h + v + d) * 0.5
    out[0::2, 1::2] = (low - h + v - d) * 0.5
    out[1::2, 0::2] = (low + h - v - d) * 0.5
    out[1::2, 1::2] = (low - h - v + d) * 0.5
    return out


@dataclass(frozen=True)
class WtConvConfig:
    """Kernels for wtconv: one base depthwise kernel applied in the pixel
    domain plus, per level, one depthwise kernel for each of the four
    sub-bands. All kernels are (C, k, k) with odd k."""

    base: np.ndarray
    levels: tuple = field(default=())  # per level: dict band -> (C, k, k)

    def __post_init__(self):
        if self.base.shape[1] % 2 == 0:
            raise ShapeMismatch("wtconv kernel size must be odd")
        if len(self.levels) < 1:
            raise ShapeMismatch("wtconv needs at least one level")

    @property
    def n_levels(self):
        return len(self.levels)

    @property
    def kernel_size(self):
        return self.base.shape[1]


def _wt_cascade(x, cfg, level):
    if level == cfg.n_levels:
        return np.zeros_like(x)
    if x.shape[0] % 2 != 0 or x.shape[1] % 2 != 0:
        raise OddDimension(
            f"wtconv level {level}: odd spatial dims {x.shape[:2]}")
    sb = dwt2(x)
    k = cfg.levels[level]
    low = depthwise_conv2d(sb.low, k["low"]) + _wt_cascade(sb.low, cfg, level + 1)
    return idwt2(WaveletSubbands(
        low=low,
        horiz=depthwise_conv2d(sb.horiz, k["horiz"]),
        vert=depthwise_conv2d(sb.vert, k["vert"]),
        diag=depthwise_conv2d(sb.diag, k["diag"]),
    ))


def wtconv(x, cfg):
    """Depthwise conv + reconstruction of per-level convolved sub-bands.

    Spatial dims must be divisible by 2**levels; output shape equals input
    shape. With all kernels equal to a centered delta this evaluates to 2x.
    """
    x = np.asarray(x)
    return depthwise_conv2d(x, cfg.base) + _wt_cascade(x, cfg, 0)
