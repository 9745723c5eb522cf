"""Shared numeric primitives for the network modules.

Conventions, fixed once for the whole package:
  - images are (H, W, C) float32
  - convolution means cross-correlation (no kernel flip)
  - boundary handling is reflect padding (edge sample not repeated)
  - dense conv weights are (out, in, kh, kw); depthwise weights (C, kh, kw);
    pointwise weights are plain (out, in) matrices
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def reflect_pad(x, top, bottom, left, right):
    return np.pad(x, ((top, bottom), (left, right), (0, 0)), mode="reflect")


def _windows(x, kh, kw):
    pad = reflect_pad(x, (kh - 1) // 2, kh // 2, (kw - 1) // 2, kw // 2)
    # (H, W, C, kh, kw)
    return sliding_window_view(pad, (kh, kw), axis=(0, 1))


def conv2d(x, weight, bias=None, stride=1):
    """Dense 2-D conv, reflect padding, odd kernel, optional stride."""
    kh, kw = weight.shape[2], weight.shape[3]
    win = _windows(x, kh, kw)
    if stride != 1:
        win = win[::stride, ::stride]
    out = np.einsum("hwckl,ockl->hwo", win, weight, optimize=True)
    if bias is not None:
        out = out + bias
    return out.astype(np.float32, copy=False)


def depthwise_conv2d(x, weight, bias=None):
    """Per-channel 2-D conv; weight is (C, kh, kw)."""
    win = _windows(x, weight.shape[1], weight.shape[2])
    out = np.einsum("hwckl,ckl->hwc", win, weight, optimize=True)
    if bias is not None:
        out = out + bias
    return out.astype(np.float32, copy=False)


def depthwise_conv2d_mult2(x, weight, bias=None):
    """Depthwise conv with channel multiplier 2; weight is (2C, kh, kw).

    Output channel o < C applies weight[o] to input channel o; output channel
    C + o applies weight[C + o] to input channel o.
    """
    c = x.shape[2]
    win = _windows(x, weight.shape[1], weight.shape[2])
    a = np.einsum("hwckl,ckl->hwc", win, weight[:c], optimize=True)
    b = np.einsum("hwckl,ckl->hwc", win, weight[c:], optimize=True)
    out = np.concatenate([a, b], axis=2)
    if bias is not None:
        out = out + bias
    return out.astype(np.float32, copy=False)


def pointwise(x, weight, bias=None):
    """1x1 conv: (H, W, Cin) @ (Cout, Cin)^T."""
    out = x @ weight.T
    if bias is not None:
        out = out + bias
    return out.astype(np.float32, copy=False)


def upsample_nearest2(x):
    return np.repeat(np.repeat(x, 2, axis=0), 2, axis=1)


def silu(x):
    return (x / (1.0 + np.exp(-x))).astype(np.float32, copy=False)


def softplus(x):
    # log(1 + e^x), stable for large |x|
    return (np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))).astype(
        np.float32, copy=False)


def layer_norm(x, scale, shift, eps=1e-5):
    """Normalize over the channel axis per pixel (biased variance)."""
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return ((x - mu) / np.sqrt(var + eps) * scale + shift).astype(
        np.float32, copy=False)
