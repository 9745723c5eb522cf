"""Differentiable building blocks mirroring the engine's numerics.

Layout is NCHW. Conventions shared with the engine: cross-correlation,
reflect padding (edge sample not repeated; padding wider than the dimension
continues the triangle wave), orthonormal Haar analysis/synthesis with
factor 1/2 per 2x2 block, unnormalized forward FFT with 1/(H*W) inverse,
channel LayerNorm with eps 1e-5 and biased variance.
"""

from functools import lru_cache

import torch
import torch.nn.functional as F


def reflect_pad(x, left, right, top, bottom):
    """Reflect padding that allows pads >= the dimension size (chained).

    A size-1 dimension has a constant triangle wave, so it is padded by
    replication (matching numpy's reflect mode on size-1 axes).
    """
    if x.shape[-1] == 1 and (left or right):
        x = F.pad(x, (left, right, 0, 0), mode="replicate")
        left = right = 0
    if x.shape[-2] == 1 and (top or bottom):
        x = F.pad(x, (0, 0, top, bottom), mode="replicate")
        top = bottom = 0
    while left or right or top or bottom:
        h, w = x.shape[-2], x.shape[-1]
        sl, sr = min(left, w - 1), min(right, w - 1)
        st, sb = min(top, h - 1), min(bottom, h - 1)
        x = F.pad(x, (sl, sr, st, sb), mode="reflect")
        left, right, top, bottom = left - sl, right - sr, top - st, bottom - sb
    return x


def conv2d_same(x, weight, bias=None, stride=1):
    kh, kw = weight.shape[-2], weight.shape[-1]
    x = reflect_pad(x, (kw - 1) // 2, kw // 2, (kh - 1) // 2, kh // 2)
    return F.conv2d(x, weight, bias, stride=stride)


def depthwise(x, weight, bias=None):
    """weight is (C, k, k), one filter per channel."""
    c = x.shape[1]
    kh, kw = weight.shape[-2], weight.shape[-1]
    x = reflect_pad(x, (kw - 1) // 2, kw // 2, (kh - 1) // 2, kh // 2)
    return F.conv2d(x, weight.unsqueeze(1), bias, groups=c)


def depthwise_mult2(x, weight, bias=None):
    """(2C, k, k) weights; first C filters feed output channels 0..C-1."""
    c = x.shape[1]
    a = depthwise(x, weight[:c], None)
    b = depthwise(x, weight[c:], None)
    out = torch.cat([a, b], dim=1)
    if bias is not None:
        out = out + bias.view(1, -1, 1, 1)
    return out


def pointwise(x, weight, bias=None):
    """1x1 conv with a plain (out, in) matrix."""
    return F.conv2d(x, weight.unsqueeze(-1).unsqueeze(-1),
                    bias if bias is not None else None)


def upsample_nearest2(x):
    return F.interpolate(x, scale_factor=2, mode="nearest")


def channel_layer_norm(x, scale, shift, eps=1e-5):
    mu = x.mean(dim=1, keepdim=True)
    var = x.var(dim=1, keepdim=True, unbiased=False)
    return (x - mu) / torch.sqrt(var + eps) * scale.view(1, -1, 1, 1) \
        + shift.view(1, -1, 1, 1)


def dwt2(x):
    a = x[:, :, 0::2, 0::2]
    b = x[:, :, 0::2, 1::2]
    c = x[:, :, 1::2, 0::2]
    d = x[:, :, 1::2, 1::2]
    return ((a + b + c + d) * 0.5, (a - b + c - d) * 0.5,
            (a + b - c - d) * 0.5, (a - b - c + d) * 0.5)


def idwt2(low, h, v, d):
    bsz, c, hh, ww = low.shape
    out = low.new_zeros((bsz, c, 2 * hh, 2 * ww))
    out[:, :, 0::2, 0::2] = (low + h + v + d) * 0.5
    out[:, :, 0::2, 1::2] = (low - h + v - d) * 0.5
    out[:, :, 1::2, 0::2] = (low + h - v - d) * 0.5
    out[:, :, 1::2, 1::2] = (low - h - v + d) * 0.5
    return out


@lru_cache(maxsize=256)
def scan_order(h, w, direction):
    """Flat pixel order; anti-diagonals walk in increasing row."""
    if direction == "horizontal":
        pairs = [(r, c) for r in range(h) for c in range(w)]
    elif direction == "vertical":
        pairs = [(r, c) for c in range(w) for r in range(h)]
    else:
        pairs = [(r, s - r) for s in range(h + w - 1)
                 for r in range(max(0, s - w + 1), min(h - 1, s) + 1)]
    idx = torch.tensor([r * w + c for r, c in pairs], dtype=torch.long)
    inv = torch.empty_like(idx)
    inv[idx] = torch.arange(len(pairs), dtype=torch.long)
    return idx, inv


_SCAN_CHUNK = 8


def selective_scan(seq, a_log, d, delta_w, delta_b, b_w, c_w):
    """Recurrence over (B, T, C); returns (B, T, C).

    Evaluated chunk-wise: within a chunk the linear recurrence unrolls to
    h_t = exp(S_t) h_0 + sum_{s<=t} exp(S_t - S_s) bx_s with S the running
    sum of the (strictly negative) decay exponents, so every exponent is
    <= 0 and the dense form is safe; chunks chain sequentially.
    """
    delta = F.softplus(seq @ delta_w.T + delta_b)            # (B, T, C)
    bs = seq @ b_w.T                                         # (B, T, N)
    cs = seq @ c_w.T
    a = -torch.exp(a_log)                                    # (C, N)

    decay = delta.unsqueeze(-1) * a                          # (B, T, C, N)
    a_bar = torch.exp(decay)
    small = a.abs() < 1e-8
    safe_a = torch.where(small, torch.ones_like(a), a)
    ratio = torch.where(small, delta.unsqueeze(-1), (a_bar - 1.0) / safe_a)
    bx = ratio * bs.unsqueeze(2) * seq.unsqueeze(-1)         # (B, T, C, N)

    bsz, t_len = seq.shape[0], seq.shape[1]
    h = seq.new_zeros((bsz, a_log.shape[0], a_log.shape[1]))
    parts = []
    for t0 in range(0, t_len, _SCAN_CHUNK):
        dc = decay[:, t0:t0 + _SCAN_CHUNK]                   # (B, L, C, N)
        chunk = dc.shape[1]
        run = torch.cumsum(dc, dim=1)                        # S_t (inclusive)
        gap = run.unsqueeze(2) - run.unsqueeze(1)            # [t, s] = S_t - S_s
        tril = torch.tril(torch.ones(chunk, chunk, dtype=torch.bool,
                                     device=gap.device))
        mix = torch.exp(gap.masked_fill(~tril.view(1, chunk, chunk, 1, 1),
                                        float("-inf")))
        hs = (torch.exp(run) * h.unsqueeze(1)
              + torch.einsum("btscn,bscn->btcn", mix, bx[:, t0:t0 + _SCAN_CHUNK]))
        h = hs[:, -1]
        parts.append(hs)
    hs = torch.cat(parts, dim=1)
    return torch.einsum("btcn,btn->btc", hs, cs) + d * seq


def directional_scan(x, direction, a_log, d, delta_w, delta_b, b_w, c_w):
    """Bidirectional 2-D scan of (B, C, H, W) along one traversal."""
    bsz, c, h, w = x.shape
    idx, inv = scan_order(h, w, direction)
    flat = x.flatten(2).transpose(1, 2)                      # (B, HW, C)
    seq = flat[:, idx]
    both = torch.cat([seq, seq.flip(1)], dim=0)
    out = selective_scan(both, a_log, d, delta_w, delta_b, b_w, c_w)
    fwd, rev = out[:bsz], out[bsz:]
    y = fwd + rev.flip(1)
    return y[:, inv].transpose(1, 2).reshape(bsz, c, h, w)
