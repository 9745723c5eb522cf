"""Scikit-learn compatible wrappers around the image-to-image operators.

Each estimator is stateless after construction (weights and parameters are
constructor arguments), so ``fit`` only validates and the transformers
compose with sklearn pipelines, ``clone`` and ``get_params`` as usual.
``transform`` accepts a single (H, W, C) image or an iterable of images and
returns the same structure.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .archive import WeightArchive, load_archive
from .causal import ate_map, default_color_intensities, default_light_intensities
from .interventions import (
    ColorInterventionSpec,
    LightInterventionSpec,
    degrade_color,
    degrade_light,
)
from .network import config_from_archive, network_forward
from .validation import check_image


def _apply(fn, X):
    if isinstance(X, np.ndarray) and X.ndim == 3:
        return fn(X)
    return [fn(np.asarray(img)) for img in X]


class _ImageTransformer(BaseEstimator, TransformerMixin):
    def fit(self, X=None, y=None):
        self._validate()
        return self

    def _validate(self):
        pass

    def transform(self, X):
        self._validate()
        return _apply(self._transform_one, X)


class CwnetEnhancer(_ImageTransformer):
    """Run the enhancement network over 3-channel images.

    Parameters
    ----------
    weights : WeightArchive or path
        Trained (or random-initialized) weight archive.
    clip : bool
        Clamp outputs to [0, 1] (the raw network output is unbounded).
    """

    def __init__(self, weights=None, clip=True):
        self.weights = weights
        self.clip = clip

    def _validate(self):
        if self.weights is None:
            raise ValueError("CwnetEnhancer needs a weight archive or path")

    def _archive(self):
        if isinstance(self.weights, WeightArchive):
            return self.weights
        return load_archive(self.weights)

    def _transform_one(self, img):
        archive = self._archive()
        out = network_forward(check_image(img, channels=3, dtype=np.float32),
                              archive, config_from_archive(archive))
        return np.clip(out, 0.0, 1.0) if self.clip else out


class LightDegradation(_ImageTransformer):
    """Illumination degradation as a transformer; parameters mirror
    LightInterventionSpec."""

    def __init__(self, gamma=3.0, noise_variance=0.05, seed=0,
                 illum_floor=0.01, blur_sigma=3.0):
        self.gamma = gamma
        self.noise_variance = noise_variance
        self.seed = seed
        self.illum_floor = illum_floor
        self.blur_sigma = blur_sigma

    def _spec(self):
        return LightInterventionSpec(
            gamma=self.gamma, noise_variance=self.noise_variance,
            seed=self.seed, illum_floor=self.illum_floor,
            blur_sigma=self.blur_sigma)

    def _transform_one(self, img):
        return degrade_light(img, self._spec())


class ColorDegradation(_ImageTransformer):
    """Color anomaly synthesis as a transformer; parameters mirror
    ColorInterventionSpec."""

    def __init__(self, hue_shift=0.0, sat_shift=0.0, rgb_offsets=(0.0, 0.0, 0.0),
                 noise_variance=0.0, seed=0):
        self.hue_shift = hue_shift
        self.sat_shift = sat_shift
        self.rgb_offsets = rgb_offsets
        self.noise_variance = noise_variance
        self.seed = seed

    def _spec(self):
        return ColorInterventionSpec(
            hue_shift=self.hue_shift, sat_shift=self.sat_shift,
            rgb_offsets=tuple(self.rgb_offsets),
            noise_variance=self.noise_variance, seed=self.seed)

    def _transform_one(self, img):
        return degrade_color(img, self._spec())


class AttributionAnalyzer(_ImageTransformer):
    """Patch-sensitivity analysis; transform returns score grids (dB)."""

    def __init__(self, intervention="light", patch_size=16, levels=5, seed=0):
        self.intervention = intervention
        self.patch_size = patch_size
        self.levels = levels
        self.seed = seed

    def _validate(self):
        if self.intervention not in ("light", "color"):
            raise ValueError(f"unknown intervention {self.intervention!r}")

    def map_one(self, img):
        intensities = (default_light_intensities(self.levels)
                       if self.intervention == "light"
                       else default_color_intensities(self.levels))
        return ate_map(img, self.intervention, self.patch_size,
                       intensities, self.seed)

    def _transform_one(self, img):
        return self.map_one(img).scores
