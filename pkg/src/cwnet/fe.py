"""Sub-band feature extraction.

The low band goes through a multi-level wavelet convolution; each detail
band gets a 3x3 depthwise convolution plus a directionally filtered copy of
the processed low band. The three directional filters are fixed constants
(never learned); a learned 1x1 mix follows them so the cross-injection has
trainable capacity.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .ops import depthwise_conv2d, pointwise
from .wavelet import WaveletSubbands, WtConvConfig, wtconv

H_KERNEL = np.array([[1.0, 0.0, -1.0],
                     [1.0, 0.0, -1.0],
                     [1.0, 0.0, -1.0]], dtype=np.float32)
V_KERNEL = np.array([[1.0, 1.0, 1.0],
                     [0.0, 0.0, 0.0],
                     [-1.0, -1.0, -1.0]], dtype=np.float32)
D_KERNEL = np.array([[0.0, 1.0, 0.0],
                     [1.0, -4.0, 1.0],
                     [0.0, 1.0, 0.0]], dtype=np.float32)
for _k in (H_KERNEL, V_KERNEL, D_KERNEL):
    _k.setflags(write=False)


def directional_conv(x, kernel, mix_weight=None):
    """Apply one fixed 3x3 kernel to every channel (reflect padding), then
    the optional learned 1x1 channel mix."""
    kernel = np.asarray(kernel, dtype=np.float32)
    if kernel.shape != (3, 3):
        raise ShapeMismatch(f"directional kernel must be 3x3, got {kernel.shape}")
    w = np.broadcast_to(kernel, (x.shape[2], 3, 3))
    out = depthwise_conv2d(x, w)
    if mix_weight is not None:
        out = pointwise(out, mix_weight)
    return out


@dataclass(frozen=True)
class FeBlockWeights:
    wtconv: WtConvConfig
    horiz_dw: np.ndarray    # (C, 3, 3)
    vert_dw: np.ndarray
    diag_dw: np.ndarray
    horiz_mix: np.ndarray   # (C, C)
    vert_mix: np.ndarray
    diag_mix: np.ndarray
    bias_low: np.ndarray    # (C,)
    bias_horiz: np.ndarray
    bias_vert: np.ndarray
    bias_diag: np.ndarray


def fe_forward(sb, w):
    """Process one level of sub-bands; shapes are preserved per band."""
    channels = sb.low.shape[2]
    if w.horiz_dw.shape[0] != channels:
        raise ShapeMismatch(
            f"weights are for {w.horiz_dw.shape[0]} channels, "
            f"sub-bands have {channels}")
    low = wtconv(sb.low, w.wtconv) + w.bias_low
    horiz = (depthwise_conv2d(sb.horiz, w.horiz_dw)
             + directional_conv(low, H_KERNEL, w.horiz_mix) + w.bias_horiz)
    vert = (depthwise_conv2d(sb.vert, w.vert_dw)
            + directional_conv(low, V_KERNEL, w.vert_mix) + w.bias_vert)
    diag = (depthwise_conv2d(sb.diag, w.diag_dw)
            + directional_conv(low, D_KERNEL, w.diag_mix) + w.bias_diag)
    return WaveletSubbands(
        low=low.astype(np.float32, copy=False),
        horiz=horiz.astype(np.float32, copy=False),
        vert=vert.astype(np.float32, copy=False),
        diag=diag.astype(np.float32, copy=False),
    )
