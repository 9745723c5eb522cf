"""Low-light image enhancement engine with causal attribution tools.

The package is organized as a functional core (wavelets, selective-scan
state-space blocks, spectral convolution, the full enhancement network,
degradation synthesis, attribution maps) plus a small sklearn-style
estimator layer in :mod:`cwnet.estimators` and a CLI in :mod:`cwnet.cli`.
"""

from .archive import WeightArchive, load_archive, save_archive
from .causal import (
    AttributionMap,
    CausalBatch,
    LossWeights,
    ate_map,
    causal_metric_loss,
    total_loss,
)
from .image import PSNR_CAP, MetricKind, QualityScore, load_image, psnr, save_image, ssim
from .interventions import (
    ColorInterventionSpec,
    LightInterventionSpec,
    degrade_color,
    degrade_light,
    illumination_map,
)
from .network import (
    NetworkConfig,
    config_from_archive,
    extract_features,
    network_forward,
    parameter_count,
    random_init,
)
from .ssm import ScanDirection, discretize_zoh, scan_order, selective_scan_1d
from .wavelet import WaveletSubbands, dwt2, idwt2, wtconv

__all__ = [
    "AttributionMap",
    "CausalBatch",
    "ColorInterventionSpec",
    "LightInterventionSpec",
    "LossWeights",
    "MetricKind",
    "NetworkConfig",
    "PSNR_CAP",
    "QualityScore",
    "ScanDirection",
    "WaveletSubbands",
    "WeightArchive",
    "ate_map",
    "causal_metric_loss",
    "config_from_archive",
    "degrade_color",
    "degrade_light",
    "discretize_zoh",
    "dwt2",
    "extract_features",
    "idwt2",
    "illumination_map",
    "load_archive",
    "load_image",
    "network_forward",
    "parameter_count",
    "psnr",
    "random_init",
    "save_archive",
    "save_image",
    "scan_order",
    "selective_scan_1d",
    "ssim",
    "total_loss",
    "wtconv",
]

__version__ = "0.1.0"
