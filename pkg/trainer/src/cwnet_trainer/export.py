"""Weight and golden-fixture export.

A fixture file is a normal weight archive plus `probe.*` tensors: the probe
image and the recorded inputs/outputs of the full forward, the stage-0
restoration block, its first horizontal scan block, and its first spectral
block. The engine's parity tests replay those ops from the same archive and
compare activations.
"""

import os

import numpy as np
import torch

from .archive import write_archive
from .model import CwnetModel
from .schema import NetConfig
from . import rng

PROBE_SPECS = ((101, (64, 64)), (102, (48, 32)), (103, (12, 20)))


def export_weights(model, path):
    write_archive(model.export(), path)


def export_fixture(model, image_hwc, path):
    """Record weights + activations for one probe image (H, W, 3)."""
    tensors = dict(model.export())
    img = torch.from_numpy(np.ascontiguousarray(image_hwc, dtype=np.float32))
    record = model.probe_activations(img.permute(2, 0, 1).unsqueeze(0))
    tensors["probe.image"] = image_hwc.astype(np.float32)
    for name, value in record.items():
        tensors[f"probe.{name}"] = value
    write_archive(tensors, path)
    return path


def make_parity_fixtures(out_dir, cfg=None, init_seed=7, probes=PROBE_SPECS):
    """Write the fixed-seed probe fixtures the engine tests consume."""
    cfg = cfg or NetConfig()
    os.makedirs(out_dir, exist_ok=True)
    model = CwnetModel(cfg, init_seed=init_seed).eval()
    paths = []
    for i, (seed, (h, w)) in enumerate(probes, 1):
        image = rng.uniform_range(seed, (h, w, 3), 0.0, 1.0).astype(np.float32)
        paths.append(export_fixture(
            model, image, os.path.join(out_dir, f"probe{i}.cwt")))
    return paths
