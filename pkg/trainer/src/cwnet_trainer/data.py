"""Synthetic training pairs.

Clean scenes are procedural (smooth color fields plus a few soft shapes).
Their degraded counterparts come from the engine's CLI (`cwnet degrade
light` for the low-light inputs, `cwnet degrade color` for the color-
anomaly negative pool), so the trainer consumes the engine purely through
its published command-line interface and file formats.
"""

import os
import shutil
import subprocess

import numpy as np
from PIL import Image

from . import rng


def make_clean_scene(seed, size=64):
    """Smooth random field with a few soft rectangles, values in [0, 1]."""
    coarse = rng.uniform_range(rng.fold_seed(seed, 1), (9, 9, 3), 0.25, 0.9)
    img = np.asarray(Image.fromarray(
        (coarse * 255).astype(np.uint8)).resize((size, size), Image.BILINEAR),
        dtype=np.float64) / 255.0
    n_shapes = 2 + int(rng.uniform_range(rng.fold_seed(seed, 2), (), 0, 3))
    for k in range(n_shapes):
        sub = rng.fold_seed(seed, 10 + k)
        r0 = int(rng.uniform_range(rng.fold_seed(sub, 1), (), 0, size * 0.7))
        c0 = int(rng.uniform_range(rng.fold_seed(sub, 2), (), 0, size * 0.7))
        hh = int(rng.uniform_range(rng.fold_seed(sub, 3), (), size * 0.1, size * 0.4))
        ww = int(rng.uniform_range(rng.fold_seed(sub, 4), (), size * 0.1, size * 0.4))
        color = rng.uniform_range(rng.fold_seed(sub, 5), (3,), 0.1, 1.0)
        img[r0:r0 + hh, c0:c0 + ww] = 0.5 * img[r0:r0 + hh, c0:c0 + ww] + 0.5 * color
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def _save_png(img, path):
    Image.fromarray(np.floor(np.clip(img, 0, 1) * 255.0 + 0.5)
                    .astype(np.uint8)).save(path, format="PNG")


def _load_png(path):
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8).astype(np.float32) / 255.0


def engine_cli_available(cwnet_cmd="cwnet"):
    return shutil.which(cwnet_cmd) is not None


def synth_pairs(n_pairs, out_dir, seed=0, size=64, cwnet_cmd="cwnet"):
    """Create `n_pairs` (clean, low, colored) PNG triples under out_dir.

    Degradation parameters are drawn from the realistic ranges per pair;
    everything is a pure function of (seed, n_pairs, size).
    """
    if not engine_cli_available(cwnet_cmd):
        raise RuntimeError(f"{cwnet_cmd!r} CLI not found; install the engine")
    os.makedirs(out_dir, exist_ok=True)
    for i in range(n_pairs):
        sub = rng.fold_seed(seed, i)
        clean = os.path.join(out_dir, f"{i:03d}_clean.png")
        low = os.path.join(out_dir, f"{i:03d}_low.png")
        colored = os.path.join(out_dir, f"{i:03d}_color.png")
        _save_png(make_clean_scene(sub, size), clean)

        gamma = float(rng.uniform_range(rng.fold_seed(sub, 101), (), 2.0, 5.0))
        # low end of the realistic variance range: keeps the denoising half
        # of the toy task learnable within few hundred iterations
        variance = float(rng.uniform_range(rng.fold_seed(sub, 102), (), 0.03, 0.04))
        subprocess.run(
            [cwnet_cmd, "degrade", "light", "--input", clean, "--output", low,
             "--gamma", f"{gamma:.4f}", "--noise-variance", f"{variance:.4f}",
             "--seed", str(rng.fold_seed(sub, 103) % 2 ** 31)],
            check=True, capture_output=True)

        hue = float(rng.uniform_range(rng.fold_seed(sub, 104), (), -30.0, 30.0))
        sat = float(rng.uniform_range(rng.fold_seed(sub, 105), (), -50.0, 50.0))
        offs = rng.uniform_range(rng.fold_seed(sub, 106), (3,), -50.0, 50.0)
        subprocess.run(
            [cwnet_cmd, "degrade", "color", "--input", clean, "--output", colored,
             f"--hue-shift={hue:.4f}", f"--sat-shift={sat:.4f}",
             "--rgb-offsets=" + ",".join(f"{v:.4f}" for v in offs),
             f"--noise-variance={variance:.4f}",
             "--seed", str(rng.fold_seed(sub, 107) % 2 ** 31)],
            check=True, capture_output=True)
    return out_dir


def load_pairs(pairs_dir):
    """Read the PNG triples back as float32 HWC arrays."""
    pairs = []
    i = 0
    while True:
        clean = os.path.join(pairs_dir, f"{i:03d}_clean.png")
        if not os.path.isfile(clean):
            break
        pairs.append({
            "clean": _load_png(clean),
            "low": _load_png(os.path.join(pairs_dir, f"{i:03d}_low.png")),
            "color": _load_png(os.path.join(pairs_dir, f"{i:03d}_color.png")),
        })
        i += 1
    if not pairs:
        raise RuntimeError(f"no pairs found in {pairs_dir}")
    return pairs


def random_crop_pair(pair, crop, seed):
    h, w = pair["clean"].shape[:2]
    r = int(rng.uniform_range(rng.fold_seed(seed, 1), (), 0, max(h - crop, 0) + 1))
    c = int(rng.uniform_range(rng.fold_seed(seed, 2), (), 0, max(w - crop, 0) + 1))
    return {k: v[r:r + crop, c:c + crop] for k, v in pair.items()}
