"""Attribution maps from patch-level interventions, and the metric losses.

An attribution map measures, in dB, how much a quality metric drops when a
patch is forced into a degraded state: score[p] = capped self-PSNR (50 dB)
minus the mean PSNR over the intervention intensities applied to that patch
alone. Larger scores mean the region is more sensitive to the degradation.

The metric loss is a ratio: distance(anchor, positive) over the normalized
summed distances from the anchor to counterfactual negatives, so pulling
the positive close and pushing degraded negatives away both reduce it.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import rng
from .errors import DegenerateDenominator, PatchTooLarge
from .image import PSNR_CAP, MetricKind, psnr, save_image
from .interventions import (
    ColorInterventionSpec,
    LightInterventionSpec,
    degrade_color,
    degrade_light,
)
from .network import extract_features  # re-exported feature hook  # noqa: F401
from .validation import check_image

DEFAULT_PATCH_SIZE = 16
DEFAULT_LEVELS = 5


def thread_budget():
    """Worker cap from CWNET_THREADS (0 or unset = auto)."""
    raw = os.environ.get("CWNET_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class AttributionMap:
    grid_rows: int
    grid_cols: int
    scores: np.ndarray          # (rows, cols) float64, dB
    patch_size: int
    metric_kind: MetricKind
    image_height: int
    image_width: int

    def to_png(self, path):
        """Min-max normalized grayscale heatmap at image extent."""
        lo, hi = float(self.scores.min()), float(self.scores.max())
        norm = (self.scores - lo) / (hi - lo) if hi > lo else np.zeros_like(self.scores)
        cells = np.kron(norm, np.ones((self.patch_size, self.patch_size)))
        save_image(cells[: self.image_height, : self.image_width, None], path)

    def to_text(self, path):
        """Raw dB scores, row-major, one grid row per line."""
        with open(path, "w") as fh:
            for row in self.scores:
                fh.write(" ".join(f"{v:.6f}" for v in row) + "\n")


def default_light_intensities(levels=DEFAULT_LEVELS):
    """Evenly spaced severities across the realistic parameter ranges."""
    gammas = np.linspace(2.0, 5.0, levels)
    variances = np.linspace(0.03, 0.08, levels)
    return [LightInterventionSpec(gamma=float(g), noise_variance=float(v), seed=t)
            for t, (g, v) in enumerate(zip(gammas, variances))]


def default_color_intensities(levels=DEFAULT_LEVELS):
    """Severity-scaled shifts; fraction f = t/levels of each maximum."""
    specs = []
    for t in range(1, levels + 1):
        f = t / levels
        specs.append(ColorInterventionSpec(
            hue_shift=30.0 * f,
            sat_shift=50.0 * f,
            rgb_offsets=(50.0 * f, 0.0, -50.0 * f),
            noise_variance=0.03 + 0.05 * f,
            seed=t,
        ))
    return specs


_DEGRADE = {"light": degrade_light, "color": degrade_color}


def ate_map(reference, intervention, patch_size=DEFAULT_PATCH_SIZE,
            intensities=None, seed=0):
    """Patch-sensitivity attribution map for one intervention family.

    `intensities` is a list of intervention specs (the severities averaged
    over); each spec's own seed is folded with `seed` so results do not
    depend on list order. The grid covers the image; edge patches may be
    smaller.
    """
    reference = check_image(reference, channels=3)
    if intervention not in _DEGRADE:
        raise ValueError(f"unknown intervention {intervention!r}")
    if patch_size < 4:
        raise ValueError(f"patch_size must be >= 4, got {patch_size}")
    h, w = reference.shape[:2]
    if patch_size > min(h, w):
        raise PatchTooLarge(
            f"patch_size {patch_size} exceeds min image side {min(h, w)}")
    if intensities is None:
        intensities = (default_light_intensities() if intervention == "light"
                       else default_color_intensities())
    if not intensities:
        raise ValueError("need at least one intervention intensity")

    degrade = _DEGRADE[intervention]
    degraded = [degrade(reference, replace(spec, seed=rng.fold_seed(seed, spec.seed)))
                for spec in intensities]

    rows = -(-h // patch_size)
    cols = -(-w // patch_size)
    scores = np.zeros((rows, cols), dtype=np.float64)

    def patch_score(cell):
        i, j = cell
        r0, c0 = i * patch_size, j * patch_size
        r1, c1 = min(r0 + patch_size, h), min(c0 + patch_size, w)
        total = 0.0
        for field in degraded:
            probe = reference.copy()
            probe[r0:r1, c0:c1] = field[r0:r1, c0:c1]
            total += float(psnr(probe, reference))
        return i, j, PSNR_CAP - total / len(degraded)

    cells = [(i, j) for i in range(rows) for j in range(cols)]
    workers = min(thread_budget(), len(cells))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(patch_score, cells))
    else:
        results = [patch_score(cell) for cell in cells]
    for i, j, value in results:
        scores[i, j] = value

    return AttributionMap(grid_rows=rows, grid_cols=cols, scores=scores,
                          patch_size=patch_size, metric_kind=MetricKind.PSNR,
                          image_height=h, image_width=w)


@dataclass(frozen=True)
class CausalBatch:
    """Anchor/positive features plus light- and color-degraded negatives."""

    anchor: np.ndarray
    positive: np.ndarray
    light_negatives: tuple
    color_negatives: tuple

    def __post_init__(self):
        if len(self.light_negatives) < 1 or len(self.color_negatives) < 1:
            raise ValueError("need at least one negative of each kind")
        shapes = {np.shape(self.anchor), np.shape(self.positive)}
        shapes.update(np.shape(n) for n in self.light_negatives)
        shapes.update(np.shape(n) for n in self.color_negatives)
        if len(shapes) != 1:
            raise ValueError(f"feature shapes differ: {shapes}")


def _l1(a, b):
    return float(np.mean(np.abs(np.asarray(a, dtype=np.float64)
                                - np.asarray(b, dtype=np.float64))))


def causal_metric_loss(batch):
    """Anchor-positive distance over normalized anchor-negative distances.

    The normalizer is 1/(L+C), so doubling every negative's distance halves
    the loss, and scaling all features together leaves it unchanged.
    """
    negatives = list(batch.light_negatives) + list(batch.color_negatives)
    denom = sum(_l1(n, batch.anchor) for n in negatives) / len(negatives)
    if denom <= 0.0:
        raise DegenerateDenominator(
            "every negative is identical to the anchor")
    return _l1(batch.positive, batch.anchor) / denom


@dataclass(frozen=True)
class LossWeights:
    fidelity: float = 1.0       # l2 term
    structure: float = 0.3      # ssim term
    perceptual: float = 0.2
    causal: float = 0.01
    semantic: float = 0.01

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value < 0:
                raise ValueError(f"loss weight {name} must be >= 0, got {value}")

    def as_tuple(self):
        return (self.fidelity, self.structure, self.perceptual,
                self.causal, self.semantic)


def total_loss(l2, ssim_loss, perceptual, causal, semantic, weights=None):
    """Weighted sum of the five training objectives."""
    weights = weights or LossWeights()
    parts = (l2, ssim_loss, perceptual, causal, semantic)
    for value in parts:
        if not np.isfinite(value) or value < 0:
            raise ValueError(f"loss components must be finite and >= 0, got {parts}")
    return float(sum(w * v for w, v in zip(weights.as_tuple(), parts)))
