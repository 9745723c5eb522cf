"""Full enhancement network: a five-stage U shape built from HFRBs.

Every stage runs one hierarchical restoration block (HFRB): split the
feature map into wavelet sub-bands, extract features (fe_forward), enhance
each detail band with a chain of directional scan blocks, reconstruct, and
refine the reconstruction with a chain of spectral residual blocks. Two
stride-2 convolutions downsample between encoder stages (channels double),
nearest-upsample + 1x1 convolutions mirror them on the decoder side with
additive skips, and the 3-channel head output is added to the input image.

Weight tensors live in a flat WeightArchive under dotted names
(``stage{i}.hfrb0.<submodule>.<tensor>``); the schema here is the contract
any weight producer must match, and `config_from_archive` recovers the
architecture hyperparameters from an archive's names and shapes.
"""

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .archive import WeightArchive
from .errors import ShapeMismatch, WeightMissing
from .fe import FeBlockWeights, fe_forward
from .lfeb import FfcWeights, LfebBlockWeights, lfeb_block
from .ops import conv2d, pointwise, upsample_nearest2
from .ssm import HfMambaWeights, ScanDirection, SsmParams, hf_mamba_block
from .validation import check_image
from .wavelet import WaveletSubbands, WtConvConfig, dwt2, idwt2

_BANDS = ("horiz", "vert", "diag")
_BAND_DIRECTION = {
    "horiz": ScanDirection.HORIZONTAL,
    "vert": ScanDirection.VERTICAL,
    "diag": ScanDirection.DIAGONAL,
}


@dataclass(frozen=True)
class NetworkConfig:
    base_channels: int = 16
    lf_blocks: tuple = (1, 3, 4, 3, 1)
    hf_blocks: tuple = (1, 2, 2, 2, 1)
    state_dim: int = 8
    wt_kernel: int = 5
    wt_levels: int = 3

    def __post_init__(self):
        if len(self.lf_blocks) != len(self.hf_blocks):
            raise ShapeMismatch("lf_blocks and hf_blocks must have equal length")
        if len(self.lf_blocks) % 2 == 0:
            raise ShapeMismatch("stage count must be odd (encoder/bottleneck/decoder)")

    @property
    def stages(self):
        return len(self.lf_blocks)

    @property
    def downsamples(self):
        return (self.stages - 1) // 2

    def stage_channels(self, stage):
        depth = min(stage, self.stages - 1 - stage)
        return self.base_channels * (2 ** depth)

    @property
    def pad_multiple(self):
        # downsampling x wavelet split x wtconv cascade on the low band
        return (2 ** self.downsamples) * 2 * (2 ** self.wt_levels)


# ---------------------------------------------------------------------------
# tensor schema


def _hf_specs(prefix, c, n_state):
    c2 = 2 * c
    return [
        (f"{prefix}.ln1.scale", (c,), "ones"),
        (f"{prefix}.ln1.shift", (c,), "zeros"),
        (f"{prefix}.vssm.in_proj.weight", (2 * c2, c), c),
        (f"{prefix}.vssm.in_proj.bias", (2 * c2,), "zeros"),
        (f"{prefix}.vssm.conv.weight", (c2, 3, 3), 9),
        (f"{prefix}.vssm.conv.bias", (c2,), "zeros"),
        (f"{prefix}.vssm.ssm.a_log", (c2, n_state), "a_log"),
        (f"{prefix}.vssm.ssm.d", (c2,), "ones"),
        (f"{prefix}.vssm.ssm.delta.weight", (c2, c2), c2),
        (f"{prefix}.vssm.ssm.delta.bias", (c2,), "zeros"),
        (f"{prefix}.vssm.ssm.b.weight", (n_state, c2), c2),
        (f"{prefix}.vssm.ssm.c.weight", (n_state, c2), c2),
        (f"{prefix}.vssm.out_proj.weight", (c, c2), (c2, 0.1)),
        (f"{prefix}.vssm.out_proj.bias", (c,), "zeros"),
        (f"{prefix}.ln2.scale", (c,), "ones"),
        (f"{prefix}.ln2.shift", (c,), "zeros"),
        (f"{prefix}.ffn.expand.weight", (c2, c), c),
        (f"{prefix}.ffn.expand.bias", (c2,), "zeros"),
        (f"{prefix}.ffn.project.weight", (c, c), (c, 0.1)),
        (f"{prefix}.ffn.project.bias", (c,), "zeros"),
    ]


def _lfeb_specs(prefix, c):
    return [
        (f"{prefix}.ffc1.weight", (2 * c, 2 * c), 2 * c),
        (f"{prefix}.ffc1.bias", (2 * c,), "zeros"),
        (f"{prefix}.conv5.weight", (2 * c, 5, 5), 25),
        (f"{prefix}.conv5.bias", (2 * c,), "zeros"),
        (f"{prefix}.proj.weight", (c, c), (c, 0.1)),
        (f"{prefix}.proj.bias", (c,), "zeros"),
        (f"{prefix}.ffc2.weight", (2 * c, 2 * c), 2 * c),
        (f"{prefix}.ffc2.bias", (2 * c,), "zeros"),
        (f"{prefix}.expand.weight", (4 * c, c), c),
        (f"{prefix}.expand.bias", (4 * c,), "zeros"),
        (f"{prefix}.compress.weight", (c, 2 * c), (2 * c, 0.1)),
        (f"{prefix}.compress.bias", (c,), "zeros"),
    ]


def _stage_specs(cfg, stage):
    c = cfg.stage_channels(stage)
    k = cfg.wt_kernel
    p = f"stage{stage}.hfrb0"
    specs = [(f"{p}.fe.wtconv.base", (c, k, k), k * k)]
    for level in range(cfg.wt_levels):
        for band in ("low", "horiz", "vert", "diag"):
            specs.append((f"{p}.fe.wtconv.level{level}.{band}", (c, k, k), k * k))
    for band in _BANDS:
        specs.append((f"{p}.fe.{band}.depthwise", (c, 3, 3), 9))
        specs.append((f"{p}.fe.{band}.mix", (c, c), c))
    for band in ("low", "horiz", "vert", "diag"):
        specs.append((f"{p}.fe.bias.{band}", (c,), "zeros"))
    for band in _BANDS:
        for j in range(cfg.hf_blocks[stage]):
            specs.extend(_hf_specs(f"{p}.{band}{j}", c, cfg.state_dim))
    for j in range(cfg.lf_blocks[stage]):
        specs.extend(_lfeb_specs(f"{p}.lfeb{j}", c))
    return specs


def tensor_specs(cfg):
    """Full (name, shape, init) schema in network topological order."""
    c = cfg.base_channels
    specs = [("stem.weight", (c, 3, 3, 3), 3 * 9), ("stem.bias", (c,), "zeros")]
    for i in range(cfg.downsamples):
        specs.extend(_stage_specs(cfg, i))
        ci = cfg.stage_channels(i)
        specs.append((f"down{i}.weight", (2 * ci, ci, 3, 3), ci * 9))
        specs.append((f"down{i}.bias", (2 * ci,), "zeros"))
    specs.extend(_stage_specs(cfg, cfg.downsamples))
    for i in range(cfg.downsamples):
        stage = cfg.downsamples + 1 + i
        co = cfg.stage_channels(stage)
        specs.append((f"up{i}.weight", (co, 2 * co), 2 * co))
        specs.append((f"up{i}.bias", (co,), "zeros"))
        specs.extend(_stage_specs(cfg, stage))
    specs.append(("head.weight", (3, c, 3, 3), (c * 9, 0.1)))
    specs.append(("head.bias", (3,), "zeros"))
    return specs


def parameter_count(cfg):
    """Exact parameter total; a pure function of the config."""
    return sum(int(np.prod(shape)) for _, shape, _ in tensor_specs(cfg))


def random_init(cfg=None, seed=0):
    """Deterministic fan-in-scaled uniform initialization.

    Weight tensors draw from U(-g/sqrt(fan_in), g/sqrt(fan_in)) with gain
    g = 1, except projections that terminate a residual branch, which use
    g = 0.1 so a fresh network stays close to the identity and its gated
    paths cannot compound outliers. a_log is log U(0.5, 1) so the state
    matrix lies in [-1, -0.5]; feedthrough and norm scales start at 1;
    every bias starts at 0. Each tensor uses a substream derived from
    (seed, crc32(name)), so the result depends only on (cfg, seed).
    """
    cfg = cfg or NetworkConfig()
    archive = WeightArchive()
    for name, shape, init in tensor_specs(cfg):
        sub = rng.fold_seed(seed, zlib.crc32(name.encode()))
        if init == "zeros":
            archive[name] = np.zeros(shape, dtype=np.float32)
        elif init == "ones":
            archive[name] = np.ones(shape, dtype=np.float32)
        elif init == "a_log":
            archive[name] = np.log(rng.uniform_range(sub, shape, 0.5, 1.0))
        else:
            fan_in, gain = init if isinstance(init, tuple) else (init, 1.0)
            bound = gain / math.sqrt(fan_in)
            archive[name] = rng.uniform_range(sub, shape, -bound, bound)
    return archive


# ---------------------------------------------------------------------------
# assembly


def _get(archive, name):
    if name not in archive:
        raise WeightMissing(name)
    return archive[name]


def _fe_weights(archive, prefix, cfg):
    g = lambda suffix: _get(archive, f"{prefix}.fe.{suffix}")
    levels = tuple(
        {band: g(f"wtconv.level{level}.{band}")
         for band in ("low", "horiz", "vert", "diag")}
        for level in range(cfg.wt_levels))
    return FeBlockWeights(
        wtconv=WtConvConfig(base=g("wtconv.base"), levels=levels),
        horiz_dw=g("horiz.depthwise"), vert_dw=g("vert.depthwise"),
        diag_dw=g("diag.depthwise"),
        horiz_mix=g("horiz.mix"), vert_mix=g("vert.mix"), diag_mix=g("diag.mix"),
        bias_low=g("bias.low"), bias_horiz=g("bias.horiz"),
        bias_vert=g("bias.vert"), bias_diag=g("bias.diag"),
    )


def _hf_weights(archive, prefix):
    g = lambda suffix: _get(archive, f"{prefix}.{suffix}")
    ssm = SsmParams(
        a_log=g("vssm.ssm.a_log"), d=g("vssm.ssm.d"),
        delta_w=g("vssm.ssm.delta.weight"), delta_b=g("vssm.ssm.delta.bias"),
        b_w=g("vssm.ssm.b.weight"), c_w=g("vssm.ssm.c.weight"),
    )
    return HfMambaWeights(
        ln1_scale=g("ln1.scale"), ln1_shift=g("ln1.shift"),
        in_proj_w=g("vssm.in_proj.weight"), in_proj_b=g("vssm.in_proj.bias"),
        conv_w=g("vssm.conv.weight"), conv_b=g("vssm.conv.bias"),
        ssm=ssm,
        out_proj_w=g("vssm.out_proj.weight"), out_proj_b=g("vssm.out_proj.bias"),
        ln2_scale=g("ln2.scale"), ln2_shift=g("ln2.shift"),
        ffn_expand_w=g("ffn.expand.weight"), ffn_expand_b=g("ffn.expand.bias"),
        ffn_project_w=g("ffn.project.weight"), ffn_project_b=g("ffn.project.bias"),
    )


def _lfeb_weights(archive, prefix):
    g = lambda suffix: _get(archive, f"{prefix}.{suffix}")
    return LfebBlockWeights(
        ffc1=FfcWeights(g("ffc1.weight"), g("ffc1.bias")),
        conv5_w=g("conv5.weight"), conv5_b=g("conv5.bias"),
        proj_w=g("proj.weight"), proj_b=g("proj.bias"),
        ffc2=FfcWeights(g("ffc2.weight"), g("ffc2.bias")),
        expand_w=g("expand.weight"), expand_b=g("expand.bias"),
        compress_w=g("compress.weight"), compress_b=g("compress.bias"),
    )


@dataclass(frozen=True)
class StageWeights:
    fe: FeBlockWeights
    bands: dict = field(default_factory=dict)  # band -> list[HfMambaWeights]
    lfeb: tuple = ()


def stage_weights(archive, cfg, stage):
    p = f"stage{stage}.hfrb0"
    bands = {band: [_hf_weights(archive, f"{p}.{band}{j}")
                    for j in range(cfg.hf_blocks[stage])]
             for band in _BANDS}
    lfebs = tuple(_lfeb_weights(archive, f"{p}.lfeb{j}")
                  for j in range(cfg.lf_blocks[stage]))
    return StageWeights(fe=_fe_weights(archive, p, cfg), bands=bands, lfeb=lfebs)


# ---------------------------------------------------------------------------
# forward passes


def hfrb_forward(x, sw, cfg, stage):
    """One hierarchical restoration block; spatial dims must be even."""
    if (len(sw.bands["horiz"]) != cfg.hf_blocks[stage]
            or len(sw.lfeb) != cfg.lf_blocks[stage]):
        raise ShapeMismatch(
            f"stage {stage} weights carry {len(sw.bands['horiz'])}/{len(sw.lfeb)} "
            f"blocks, config expects {cfg.hf_blocks[stage]}/{cfg.lf_blocks[stage]}")
    sb = fe_forward(dwt2(x), sw.fe)
    enhanced = {}
    for band in _BANDS:
        feat = getattr(sb, band)
        for block in sw.bands[band]:
            feat = hf_mamba_block(feat, block, _BAND_DIRECTION[band])
        enhanced[band] = feat
    merged = idwt2(WaveletSubbands(low=sb.low, **enhanced))
    for block in sw.lfeb:
        merged = lfeb_block(merged, block)
    return merged


def _pad_reflect_to_multiple(img, multiple):
    h, w = img.shape[:2]
    pad_h = (-h) % multiple
    pad_w = (-w) % multiple
    if pad_h or pad_w:
        img = np.pad(img, ((0, pad_h), (0, pad_w), (0, 0)), mode="reflect")
    return img


def _encoder(img, archive, cfg):
    """Shared encoder walk; returns (padded input, skip activations)."""
    img = check_image(img, channels=3, dtype=np.float32)
    x = _pad_reflect_to_multiple(img, cfg.pad_multiple)
    feat = conv2d(x, _get(archive, "stem.weight"), _get(archive, "stem.bias"))
    skips = []
    for i in range(cfg.downsamples):
        feat = hfrb_forward(feat, stage_weights(archive, cfg, i), cfg, i)
        skips.append(feat)
        feat = conv2d(feat, _get(archive, f"down{i}.weight"),
                      _get(archive, f"down{i}.bias"), stride=2)
    mid = cfg.downsamples
    feat = hfrb_forward(feat, stage_weights(archive, cfg, mid), cfg, mid)
    return x, feat, skips


def network_forward(img, weights, cfg=None):
    """Enhance a 3-channel image; output shape equals input shape.

    The input is reflect-padded to the architecture's required divisibility
    and cropped back after the head; the head output is added to the input
    (global residual). Values are not clamped here.
    """
    cfg = cfg or config_from_archive(weights)
    h, w = img.shape[:2]
    x, feat, skips = _encoder(img, weights, cfg)
    for i in range(cfg.downsamples):
        stage = cfg.downsamples + 1 + i
        feat = pointwise(upsample_nearest2(feat),
                         _get(weights, f"up{i}.weight"),
                         _get(weights, f"up{i}.bias"))
        feat = feat + skips[cfg.downsamples - 1 - i]
        feat = hfrb_forward(feat, stage_weights(weights, cfg, stage), cfg, stage)
    out = conv2d(feat, _get(weights, "head.weight"), _get(weights, "head.bias"))
    out = out + x
    return out[:h, :w]


def extract_features(img, weights, cfg=None):
    """Encoder-only forward pass; returns the bottleneck activation.

    For inputs already divisible by the pad multiple the result has shape
    (H / 2^downsamples, W / 2^downsamples, base_channels * 2^downsamples).
    """
    cfg = cfg or config_from_archive(weights)
    _, feat, _ = _encoder(img, weights, cfg)
    return feat


def config_from_archive(archive):
    """Recover the NetworkConfig implied by an archive's names and shapes."""
    base = _get(archive, "stem.weight").shape[0]
    stages = 0
    while f"stage{stages}.hfrb0.fe.wtconv.base" in archive:
        stages += 1
    if stages == 0:
        raise WeightMissing("stage0.hfrb0.fe.wtconv.base")

    def count(pattern):
        j = 0
        while pattern.format(j) in archive:
            j += 1
        return j

    hf = tuple(count(f"stage{s}.hfrb0.horiz{{}}.ln1.scale")
               for s in range(stages))
    lf = tuple(count(f"stage{s}.hfrb0.lfeb{{}}.ffc1.weight") for s in range(stages))
    wt_levels = count("stage0.hfrb0.fe.wtconv.level{}.low")
    return NetworkConfig(
        base_channels=base,
        lf_blocks=lf,
        hf_blocks=hf,
        state_dim=_get(archive, "stage0.hfrb0.horiz0.vssm.ssm.a_log").shape[1],
        wt_kernel=_get(archive, "stage0.hfrb0.fe.wtconv.base").shape[1],
        wt_levels=wt_levels,
    )
