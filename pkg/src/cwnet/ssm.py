"""Selective-scan state-space machinery for the high-frequency bands.

A diagonal state-space model is discretized per step with zero-order hold,

    a_bar = exp(delta * a)
    b_bar = ((exp(delta * a) - 1) / a) * b      (-> delta * b as a -> 0)

and run as the recurrence h_t = a_bar_t * h_{t-1} + b_bar_t * x_t with
output y_t = C_t . h_t + d * x_t. Selectivity: delta_t, B_t, C_t are linear
projections of the current input vector. The state matrix is parameterized
as A = -exp(a_log), so it is strictly negative and |a_bar| < 1 for any
positive step, which keeps the recurrence contractive.

2-D inputs are processed by flattening along one of three fixed traversals
(row-major, column-major, or anti-diagonal), scanning forward and backward,
summing, and scattering back.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import EmptySequence, NonPositiveDelta, ShapeMismatch
from .ops import depthwise_conv2d, layer_norm, pointwise, silu

_SMALL_A = 1e-8


class ScanDirection(enum.Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    DIAGONAL = "diagonal"


def discretize_zoh(a, b, delta):
    """Exact zero-order-hold discretization of one scalar (a, b) pair.

    Uses the analytic limit b_bar = delta * b when |a| < 1e-8 to avoid
    catastrophic cancellation.
    """
    if delta <= 0:
        raise NonPositiveDelta(f"delta must be > 0, got {delta}")
    a_bar = float(np.exp(delta * a))
    if abs(a) < _SMALL_A:
        b_bar = delta * b
    else:
        b_bar = (a_bar - 1.0) / a * b
    return a_bar, float(b_bar)


@dataclass(frozen=True)
class SsmParams:
    """Per-channel diagonal state-space parameters with selective projections.

    a_log:   (C, N) with A = -exp(a_log)
    d:       (C,) feedthrough
    delta_w: (C, C), delta_b: (C,) -> delta_t = softplus(W x_t + b)
    b_w:     (N, C) -> B_t = b_w @ x_t
    c_w:     (N, C) -> C_t = c_w @ x_t
    """

    a_log: np.ndarray
    d: np.ndarray
    delta_w: np.ndarray
    delta_b: np.ndarray
    b_w: np.ndarray
    c_w: np.ndarray

    @property
    def channels(self):
        return self.a_log.shape[0]

    @property
    def state_dim(self):
        return self.a_log.shape[1]


def selective_scan_1d(x_seq, p):
    """Run the selective recurrence over a (T, C) sequence; returns (T, C).

    Arithmetic follows the input dtype (float32 inside the network, float64
    when callers want reference precision).
    """
    x = np.asarray(x_seq)
    if x.dtype not in (np.float32, np.float64):
        x = x.astype(np.float32)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptySequence(f"need a non-empty (T, C) sequence, got {x.shape}")
    if x.shape[1] != p.channels:
        raise ShapeMismatch(
            f"sequence has {x.shape[1]} channels, params expect {p.channels}")

    dt = x.dtype
    t_len = x.shape[0]
    raw = x @ p.delta_w.T.astype(dt) + p.delta_b.astype(dt)
    delta = np.maximum(raw, 0.0) + np.log1p(np.exp(-np.abs(raw)))  # (T, C)
    bs = x @ p.b_w.T.astype(dt)                            # (T, N)
    cs = x @ p.c_w.T.astype(dt)                            # (T, N)
    a = -np.exp(p.a_log.astype(dt))                        # (C, N)

    da = delta[:, :, None] * a                             # (T, C, N)
    a_bar = np.exp(da)
    small = np.abs(a) < _SMALL_A
    ratio = np.where(small, delta[:, :, None], (a_bar - 1.0) / np.where(small, 1.0, a))
    bx = ratio * bs[:, None, :] * x[:, :, None]            # (T, C, N)

    hs = np.empty_like(bx)
    h = np.zeros((p.channels, p.state_dim), dtype=dt)
    for t in range(t_len):
        h = a_bar[t] * h + bx[t]
        hs[t] = h
    y = np.einsum("tcn,tn->tc", hs, cs, optimize=True) + p.d.astype(dt) * x
    return y.astype(dt, copy=False)


def scan_order(shape, direction):
    """Pixel traversal for a (height, width) grid; each index appears once.

    HORIZONTAL: row-major. VERTICAL: column-major. DIAGONAL: anti-diagonals
    in increasing row+col, each walked in increasing row.
    """
    h, w = shape
    if direction is ScanDirection.HORIZONTAL:
        return [(r, c) for r in range(h) for c in range(w)]
    if direction is ScanDirection.VERTICAL:
        return [(r, c) for c in range(w) for r in range(h)]
    order = []
    for s in range(h + w - 1):
        for r in range(max(0, s - w + 1), min(h - 1, s) + 1):
            order.append((r, s - r))
    return order


def _flat_order(shape, direction):
    idx = np.asarray(scan_order(shape, direction), dtype=np.intp)
    return idx[:, 0] * shape[1] + idx[:, 1]


def directional_2d_ssm(x, direction, p, bidirectional=True):
    """Scan a (H, W, C) image along `direction`; shape is preserved.

    The flattened sequence is scanned forward and, if bidirectional, also in
    reverse; both outputs are summed in image layout.
    """
    h, w, c = x.shape
    flat = x.reshape(h * w, c)
    order = _flat_order((h, w), direction)
    seq = flat[order]
    y = selective_scan_1d(seq, p)
    if bidirectional:
        y = y + selective_scan_1d(seq[::-1], p)[::-1]
    out = np.empty_like(flat)
    out[order] = y
    return out.reshape(h, w, c)


@dataclass(frozen=True)
class HfMambaWeights:
    """One high-frequency scan block: LN -> gated selective-scan branch with
    residual, then LN -> gated feedforward with residual. The state-space
    branch runs at twice the block width."""

    ln1_scale: np.ndarray
    ln1_shift: np.ndarray
    in_proj_w: np.ndarray   # (4C, C): main 2C and gate 2C
    in_proj_b: np.ndarray
    conv_w: np.ndarray      # (2C, 3, 3) depthwise
    conv_b: np.ndarray
    ssm: SsmParams          # at 2C channels
    out_proj_w: np.ndarray  # (C, 2C)
    out_proj_b: np.ndarray
    ln2_scale: np.ndarray
    ln2_shift: np.ndarray
    ffn_expand_w: np.ndarray   # (2C, C)
    ffn_expand_b: np.ndarray
    ffn_project_w: np.ndarray  # (C, C)
    ffn_project_b: np.ndarray


def hf_mamba_block(x, w, direction):
    """Apply one scan block to a (H, W, C) band."""
    c = x.shape[2]
    if w.ln1_scale.shape[0] != c:
        raise ShapeMismatch(
            f"weights are for {w.ln1_scale.shape[0]} channels, input has {c}")
    u = layer_norm(x, w.ln1_scale, w.ln1_shift)
    z = pointwise(u, w.in_proj_w, w.in_proj_b)
    main, gate = z[:, :, :2 * c], z[:, :, 2 * c:]
    main = depthwise_conv2d(main, w.conv_w, w.conv_b)
    main = silu(main)
    main = directional_2d_ssm(main, direction, w.ssm)
    gated = main * silu(gate)
    v = pointwise(gated, w.out_proj_w, w.out_proj_b) + x

    g = layer_norm(v, w.ln2_scale, w.ln2_shift)
    f = pointwise(g, w.ffn_expand_w, w.ffn_expand_b)
    f = f[:, :, :c] * f[:, :, c:]
    f = pointwise(f, w.ffn_project_w, w.ffn_project_b)
    return (f + v).astype(np.float32, copy=False)
