"""Network hyperparameters and the weight-name contract.

The engine consumes flat archives with dotted tensor names
(``stage{i}.hfrb0.<submodule>.<tensor>``); this table defines every name,
shape, and initialization the trainer must emit. It mirrors the published
contract rather than importing the engine.
"""

import math
import zlib
from dataclasses import dataclass

import numpy as np

from . import rng

BANDS = ("horiz", "vert", "diag")
ALL_BANDS = ("low", "horiz", "vert", "diag")


@dataclass(frozen=True)
class NetConfig:
    base_channels: int = 8
    lf_blocks: tuple = (1, 1, 1)
    hf_blocks: tuple = (1, 1, 1)
    state_dim: int = 4
    wt_kernel: int = 5
    wt_levels: int = 3

    @property
    def stages(self):
        return len(self.lf_blocks)

    @property
    def downsamples(self):
        return (self.stages - 1) // 2

    def stage_channels(self, stage):
        return self.base_channels * 2 ** min(stage, self.stages - 1 - stage)

    @property
    def pad_multiple(self):
        return (2 ** self.downsamples) * 2 * (2 ** self.wt_levels)


def _hf_specs(prefix, c, n_state):
    c2 = 2 * c
    return [
        (f"{prefix}.ln1.scale", (c,), "ones"),
        (f"{prefix}.ln1.shift", (c,), "zeros"),
        (f"{prefix}.vssm.in_proj.weight", (2 * c2, c), (c, 1.0)),
        (f"{prefix}.vssm.in_proj.bias", (2 * c2,), "zeros"),
        (f"{prefix}.vssm.conv.weight", (c2, 3, 3), (9, 1.0)),
        (f"{prefix}.vssm.conv.bias", (c2,), "zeros"),
        (f"{prefix}.vssm.ssm.a_log", (c2, n_state), "a_log"),
        (f"{prefix}.vssm.ssm.d", (c2,), "ones"),
        (f"{prefix}.vssm.ssm.delta.weight", (c2, c2), (c2, 1.0)),
        (f"{prefix}.vssm.ssm.delta.bias", (c2,), "zeros"),
        (f"{prefix}.vssm.ssm.b.weight", (n_state, c2), (c2, 1.0)),
        (f"{prefix}.vssm.ssm.c.weight", (n_state, c2), (c2, 1.0)),
        (f"{prefix}.vssm.out_proj.weight", (c, c2), (c2, 0.1)),
        (f"{prefix}.vssm.out_proj.bias", (c,), "zeros"),
        (f"{prefix}.ln2.scale", (c,), "ones"),
        (f"{prefix}.ln2.shift", (c,), "zeros"),
        (f"{prefix}.ffn.expand.weight", (c2, c), (c, 1.0)),
        (f"{prefix}.ffn.expand.bias", (c2,), "zeros"),
        (f"{prefix}.ffn.project.weight", (c, c), (c, 0.1)),
        (f"{prefix}.ffn.project.bias", (c,), "zeros"),
    ]


def _lfeb_specs(prefix, c):
    return [
        (f"{prefix}.ffc1.weight", (2 * c, 2 * c), (2 * c, 1.0)),
        (f"{prefix}.ffc1.bias", (2 * c,), "zeros"),
        (f"{prefix}.conv5.weight", (2 * c, 5, 5), (25, 1.0)),
        (f"{prefix}.conv5.bias", (2 * c,), "zeros"),
        (f"{prefix}.proj.weight", (c, c), (c, 0.1)),
        (f"{prefix}.proj.bias", (c,), "zeros"),
        (f"{prefix}.ffc2.weight", (2 * c, 2 * c), (2 * c, 1.0)),
        (f"{prefix}.ffc2.bias", (2 * c,), "zeros"),
        (f"{prefix}.expand.weight", (4 * c, c), (c, 1.0)),
        (f"{prefix}.expand.bias", (4 * c,), "zeros"),
        (f"{prefix}.compress.weight", (c, 2 * c), (2 * c, 0.1)),
        (f"{prefix}.compress.bias", (c,), "zeros"),
    ]


def _stage_specs(cfg, stage):
    c = cfg.stage_channels(stage)
    k = cfg.wt_kernel
    p = f"stage{stage}.hfrb0"
    specs = [(f"{p}.fe.wtconv.base", (c, k, k), (k * k, 1.0))]
    for level in range(cfg.wt_levels):
        for band in ALL_BANDS:
            specs.append((f"{p}.fe.wtconv.level{level}.{band}", (c, k, k),
                          (k * k, 1.0)))
    for band in BANDS:
        specs.append((f"{p}.fe.{band}.depthwise", (c, 3, 3), (9, 1.0)))
        specs.append((f"{p}.fe.{band}.mix", (c, c), (c, 1.0)))
    for band in ALL_BANDS:
        specs.append((f"{p}.fe.bias.{band}", (c,), "zeros"))
    for band in BANDS:
        for j in range(cfg.hf_blocks[stage]):
            specs.extend(_hf_specs(f"{p}.{band}{j}", c, cfg.state_dim))
    for j in range(cfg.lf_blocks[stage]):
        specs.extend(_lfeb_specs(f"{p}.lfeb{j}", c))
    return specs


def tensor_specs(cfg):
    c = cfg.base_channels
    specs = [("stem.weight", (c, 3, 3, 3), (27, 1.0)), ("stem.bias", (c,), "zeros")]
    for i in range(cfg.downsamples):
        specs.extend(_stage_specs(cfg, i))
        ci = cfg.stage_channels(i)
        specs.append((f"down{i}.weight", (2 * ci, ci, 3, 3), (ci * 9, 1.0)))
        specs.append((f"down{i}.bias", (2 * ci,), "zeros"))
    specs.extend(_stage_specs(cfg, cfg.downsamples))
    for i in range(cfg.downsamples):
        stage = cfg.downsamples + 1 + i
        co = cfg.stage_channels(stage)
        specs.append((f"up{i}.weight", (co, 2 * co), (2 * co, 1.0)))
        specs.append((f"up{i}.bias", (co,), "zeros"))
        specs.extend(_stage_specs(cfg, stage))
    specs.append(("head.weight", (3, c, 3, 3), (c * 9, 0.1)))
    specs.append(("head.bias", (3,), "zeros"))
    return specs


def tensor_names(cfg):
    return [name for name, _, _ in tensor_specs(cfg)]


def init_tensor(name, shape, init, seed):
    sub = rng.fold_seed(seed, zlib.crc32(name.encode()))
    if init == "zeros":
        return np.zeros(shape, dtype=np.float32)
    if init == "ones":
        return np.ones(shape, dtype=np.float32)
    if init == "a_log":
        return np.log(rng.uniform_range(sub, shape, 0.5, 1.0)).astype(np.float32)
    fan_in, gain = init
    bound = gain / math.sqrt(fan_in)
    return rng.uniform_range(sub, shape, -bound, bound).astype(np.float32)


def init_weights(cfg, seed=0):
    """Name -> float32 array mapping in schema order."""
    return {name: init_tensor(name, shape, init, seed)
            for name, shape, init in tensor_specs(cfg)}
