"""Synthetic degradation generators.

Two families of interventions, both deterministic given (spec, seed):

  light  — a physics-style darkening I -> I * L^(gamma-1) + noise, where L
           is a smoothed max-RGB illumination estimate. Exponents in [2, 5]
           and noise variance in [0.03, 0.08] are the realistic ranges;
           gamma=1 with zero variance is the exact identity (handy in tests).
  color  — sequential hue shift, saturation shift, per-channel RGB offsets
           (all on the 8-bit scale, /255 internally), then noise.

Noise is i.i.d. Gaussian per pixel and channel from the package PRNG
(cwnet.rng, SplitMix64 + Box-Muller), drawn in flat C order.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from . import rng
from .validation import check_image

LIGHT_GAMMA_RANGE = (2.0, 5.0)
NOISE_VARIANCE_RANGE = (0.03, 0.08)
HUE_SHIFT_RANGE = (-30.0, 30.0)
SAT_SHIFT_RANGE = (-50.0, 50.0)
RGB_OFFSET_RANGE = (-50.0, 50.0)


@dataclass(frozen=True)
class LightInterventionSpec:
    gamma: float = 3.0
    noise_variance: float = 0.05
    seed: int = 0
    illum_floor: float = 0.01
    blur_sigma: float = 3.0


@dataclass(frozen=True)
class ColorInterventionSpec:
    hue_shift: float = 0.0       # degrees
    sat_shift: float = 0.0       # 8-bit units
    rgb_offsets: tuple = (0.0, 0.0, 0.0)  # 8-bit units
    noise_variance: float = 0.0
    seed: int = 0


def illumination_map(img, spec=None):
    """Smoothed max-RGB brightness estimate, clamped to [floor, 1]."""
    spec = spec or LightInterventionSpec()
    img = check_image(img, channels=3)
    est = img.max(axis=2).astype(np.float64)
    est = gaussian_filter(est, sigma=spec.blur_sigma, mode="reflect")
    return np.clip(est, spec.illum_floor, 1.0)[:, :, None]


def _noise(shape, variance, seed):
    if variance == 0.0:
        return 0.0
    return rng.gaussian(seed, shape) * np.sqrt(variance)


def degrade_light(img, spec):
    """Darken per pixel: I * L^(gamma-1) + Gaussian noise, clamped to [0,1].

    The L^(gamma-1) form is the division-free equivalent of (I/L) * L^gamma.
    Since L <= 1, any gamma > 1 never brightens a pixel before noise.
    """
    img = check_image(img, channels=3)
    lum = illumination_map(img, spec)
    out = img.astype(np.float64) * lum ** (spec.gamma - 1.0)
    out = out + _noise(img.shape, spec.noise_variance, spec.seed)
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def rgb_to_hsv(img):
    """Vectorized RGB -> HSV on [0,1]; hue in [0,1), 0 for achromatic pixels."""
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    maxc = np.maximum(np.maximum(r, g), b)
    minc = np.minimum(np.minimum(r, g), b)
    delta = maxc - minc
    sat = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)

    safe = np.where(delta > 0, delta, 1.0)
    hue = np.zeros_like(maxc)
    hue = np.where((maxc == r) & (delta > 0), ((g - b) / safe) % 6.0, hue)
    hue = np.where((maxc == g) & (delta > 0), (b - r) / safe + 2.0, hue)
    hue = np.where((maxc == b) & (delta > 0) & (maxc != r) & (maxc != g),
                   (r - g) / safe + 4.0, hue)
    return np.stack([hue / 6.0, sat, maxc], axis=-1)


def hsv_to_rgb(hsv):
    """Vectorized HSV -> RGB; exact inverse of rgb_to_hsv up to float error."""
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    h6 = (h % 1.0) * 6.0
    i = np.floor(h6).astype(int) % 6
    f = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    choices_r = [v, q, p, p, t, v]
    choices_g = [t, v, v, q, p, p]
    choices_b = [p, p, t, v, v, q]
    r = np.choose(i, choices_r)
    g = np.choose(i, choices_g)
    b = np.choose(i, choices_b)
    return np.stack([r, g, b], axis=-1)


def degrade_color(img, spec):
    """Apply hue/saturation shifts, RGB offsets, then noise; clamp to [0,1]."""
    img = check_image(img, channels=3)
    hsv = rgb_to_hsv(img.astype(np.float64))
    hsv[..., 0] = (hsv[..., 0] + spec.hue_shift / 360.0) % 1.0
    hsv[..., 1] = np.clip(hsv[..., 1] + spec.sat_shift / 255.0, 0.0, 1.0)
    out = hsv_to_rgb(hsv)
    out = out + np.asarray(spec.rgb_offsets, dtype=np.float64) / 255.0
    out = out + _noise(img.shape, spec.noise_variance, spec.seed)
    return np.clip(out, 0.0, 1.0).astype(np.float32)
