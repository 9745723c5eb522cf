"""Low-frequency enhancement: residual blocks built on spectral convolution.

ffc_conv mixes channels in the 2-D frequency domain: transform each channel
(unnormalized forward DFT, 1/(H*W) inverse — fixed contract), stack real and
imaginary parts as channels, apply a learned pointwise map with ReLU,
unstack, and invert. Because the nonlinearity breaks Hermitian symmetry the
inverse transform's real part is taken as the output.

simple_gate splits channels in half and multiplies the halves; both residual
blocks use it as their only activation.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .ops import depthwise_conv2d_mult2, pointwise
from .validation import check_even_channels


@dataclass(frozen=True)
class FfcWeights:
    """Pointwise spectral map acting on stacked (real, imag) channels:
    weight is (2*C_out, 2*C_in), bias (2*C_out)."""

    weight: np.ndarray
    bias: np.ndarray


def ffc_conv(x, w, apply_relu=True):
    """Spectral pointwise convolution; same spatial shape, C_in -> C_out.

    `apply_relu=False` is the linear test mode: with an identity weight the
    op is then the identity up to transform round-off.
    """
    c_in = x.shape[2]
    if w.weight.shape[1] != 2 * c_in:
        raise ShapeMismatch(
            f"spectral weight expects {w.weight.shape[1] // 2} channels, "
            f"input has {c_in}")
    spec = np.fft.fft2(x, axes=(0, 1))
    stacked = np.concatenate([spec.real, spec.imag], axis=2).astype(np.float32)
    mixed = pointwise(stacked, w.weight, w.bias)
    if apply_relu:
        mixed = np.maximum(mixed, 0.0)
    c_out = mixed.shape[2] // 2
    spec_out = mixed[:, :, :c_out] + 1j * mixed[:, :, c_out:]
    out = np.fft.ifft2(spec_out, axes=(0, 1)).real
    return out.astype(np.float32, copy=False)


def simple_gate(x):
    """Split channels into halves (a, b) and return a * b."""
    check_even_channels(x)
    half = x.shape[2] // 2
    return x[:, :, :half] * x[:, :, half:]


@dataclass(frozen=True)
class LfebBlockWeights:
    """Weights for one two-part residual unit.

    Part 1: ffc -> depthwise 5x5 with channel multiplier 2 -> simple_gate ->
    1x1 projection, added to the input. Part 2: ffc -> 1x1 expand x4 ->
    simple_gate -> 1x1 compress, added again.
    """

    ffc1: FfcWeights
    conv5_w: np.ndarray     # (2C, 5, 5)
    conv5_b: np.ndarray
    proj_w: np.ndarray      # (C, C)
    proj_b: np.ndarray
    ffc2: FfcWeights
    expand_w: np.ndarray    # (4C, C)
    expand_b: np.ndarray
    compress_w: np.ndarray  # (C, 2C)
    compress_b: np.ndarray


def lfeb_block(x, w):
    """Apply both residual parts; output shape equals input shape."""
    if w.proj_w.shape[0] != x.shape[2]:
        raise ShapeMismatch(
            f"weights are for {w.proj_w.shape[0]} channels, input has {x.shape[2]}")
    t = ffc_conv(x, w.ffc1)
    t = depthwise_conv2d_mult2(t, w.conv5_w, w.conv5_b)
    t = simple_gate(t)
    y1 = x + pointwise(t, w.proj_w, w.proj_b)

    u = ffc_conv(y1, w.ffc2)
    u = pointwise(u, w.expand_w, w.expand_b)
    u = simple_gate(u)
    y2 = y1 + pointwise(u, w.compress_w, w.compress_b)
    return y2.astype(np.float32, copy=False)
