"""Training objectives.

Five components are combined: pixel fidelity (l2), structural similarity,
perceptual feature distance, the causal metric ratio over degraded
negatives, and an instance-level prompt-contrast term. The last two are the
causal machinery; the first three are conventional restoration losses.

No pretrained feature extractors are assumed: the perceptual term defaults
to a frozen random conv stack and the prompt-contrast encoders default to
deterministic toy embedders. Both are injectable, so real VGG/CLIP models
drop in where downloads are possible.
"""

import zlib
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from . import rng


class EmptyMask(Exception):
    pass


# ---------------------------------------------------------------------------
# structural similarity (differentiable, mirrors the engine's constants)

_WINDOW = 11
_SIGMA = 1.5
_K1, _K2 = 0.01, 0.03


def _gaussian_1d(dtype):
    half = (_WINDOW - 1) / 2.0
    x = torch.arange(_WINDOW, dtype=dtype) - half
    w = torch.exp(-(x ** 2) / (2.0 * _SIGMA ** 2))
    return w / w.sum()


def ssim(a, b):
    """Mean SSIM over fully valid 11x11 windows; inputs are (B, C, H, W)."""
    c = a.shape[1]
    w = _gaussian_1d(a.dtype)
    kv = w.view(1, 1, _WINDOW, 1).expand(c, 1, _WINDOW, 1).contiguous()
    kh = w.view(1, 1, 1, _WINDOW).expand(c, 1, 1, _WINDOW).contiguous()

    def smooth(x):
        return F.conv2d(F.conv2d(x, kv, groups=c), kh, groups=c)

    mx, my = smooth(a), smooth(b)
    vx = smooth(a * a) - mx * mx
    vy = smooth(b * b) - my * my
    cxy = smooth(a * b) - mx * my
    c1, c2 = _K1 ** 2, _K2 ** 2
    num = (2 * mx * my + c1) * (2 * cxy + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return (num / den).mean()


def ssim_loss(pre, target):
    return 1.0 - ssim(pre, target)


# ---------------------------------------------------------------------------
# perceptual distance


class FrozenFeatureNet(nn.Module):
    """Fixed-seed random conv stack used as the perceptual feature space."""

    def __init__(self, seed=0, widths=(16, 32, 64)):
        super().__init__()
        layers = []
        c_in = 3
        for i, c_out in enumerate(widths):
            w = rng.gaussian(rng.fold_seed(seed, i), (c_out, c_in, 3, 3))
            w = (w / np.sqrt(c_in * 9)).astype(np.float32)
            conv = nn.Conv2d(c_in, c_out, 3, stride=2, padding=1, bias=False)
            conv.weight.data = torch.from_numpy(w)
            layers.append(conv)
            c_in = c_out
        self.stack = nn.ModuleList(layers)
        for p in self.parameters():
            p.requires_grad_(False)

    def forward(self, x):
        feats = []
        for conv in self.stack:
            x = F.relu(conv(x))
            feats.append(x)
        return feats


def perceptual_loss(pre, target, feature_net):
    total = 0.0
    for fp, ft in zip(feature_net(pre), feature_net(target)):
        total = total + (fp - ft).abs().mean()
    return total


# ---------------------------------------------------------------------------
# causal metric ratio


def causal_metric_loss(anchor, positive, light_negatives, color_negatives):
    """L1(positive, anchor) over the mean anchor-negative L1 distance."""
    negatives = list(light_negatives) + list(color_negatives)
    denom = sum((n - anchor).abs().mean() for n in negatives) / len(negatives)
    return (positive - anchor).abs().mean() / denom


# ---------------------------------------------------------------------------
# instance-level prompt contrast


@dataclass
class SemanticBatch:
    image: torch.Tensor          # (3, H, W)
    masks: tuple                 # of (H, W) bool tensors, each non-empty
    prompt_low: str
    prompt_normal: str
    label: float                 # 0 = low light, 1 = normal light


def grid_masks(height, width, rows=4, cols=4):
    """Regular tile pseudo-instances (the pluggable segmenter default)."""
    masks = []
    for i in range(rows):
        for j in range(cols):
            m = torch.zeros(height, width, dtype=torch.bool)
            r0, r1 = i * height // rows, (i + 1) * height // rows
            c0, c1 = j * width // cols, (j + 1) * width // cols
            m[r0:r1, c0:c1] = True
            masks.append(m)
    return tuple(masks)


class ToyImageEncoder:
    """Deterministic stand-in for a vision-language image tower: pooled
    color statistics through a fixed random projection."""

    def __init__(self, seed=0, dim=32):
        proj = rng.gaussian(rng.fold_seed(seed, 0xC11F), (dim, 48))
        self.proj = torch.from_numpy((proj / np.sqrt(48)).astype(np.float32))

    def __call__(self, img):
        pooled = F.adaptive_avg_pool2d(img.unsqueeze(0), (4, 4)).flatten()
        return self.proj.to(img.dtype) @ pooled


class ToyTextEncoder:
    """Deterministic prompt embeddings keyed by the prompt text."""

    def __init__(self, seed=0, dim=32):
        self.seed = seed
        self.dim = dim

    def __call__(self, prompt):
        vec = rng.gaussian(rng.fold_seed(self.seed, zlib.crc32(prompt.encode())),
                           (self.dim,))
        return torch.from_numpy(vec.astype(np.float32))


def _masked_crop(image, mask):
    if not bool(mask.any()):
        raise EmptyMask("a segment mask selects no pixels")
    rows = torch.where(mask.any(dim=1))[0]
    cols = torch.where(mask.any(dim=0))[0]
    crop = image[:, rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]
    sub = mask[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]
    return crop * sub.to(crop.dtype)


def semantic_clip_loss(batch, image_encoder, text_encoder, logit_scale=1.0):
    """Mean per-instance probability of the low-light prompt, scored with
    binary cross-entropy against the batch label."""
    t_low = text_encoder(batch.prompt_low)
    t_normal = text_encoder(batch.prompt_normal)
    probs = []
    for mask in batch.masks:
        emb = image_encoder(_masked_crop(batch.image, mask))
        cos_low = F.cosine_similarity(emb, t_low.to(emb.dtype), dim=0)
        cos_normal = F.cosine_similarity(emb, t_normal.to(emb.dtype), dim=0)
        pair = torch.stack([cos_low, cos_normal]) * logit_scale
        probs.append(torch.softmax(pair, dim=0)[0])
    y_hat = torch.stack(probs).mean().clamp(1e-7, 1.0 - 1e-7)
    y = batch.label
    return -(y * torch.log(y_hat) + (1.0 - y) * torch.log(1.0 - y_hat))
