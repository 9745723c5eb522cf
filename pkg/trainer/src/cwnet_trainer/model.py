"""Trainable torch twin of the enhancement network.

Parameters are held flat under the archive's dotted names so export is a
direct walk of the schema; the forward pass reproduces the engine's
semantics op for op (see functional.py for the shared conventions).
"""

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from . import functional as fn
from . import schema

_DIRECTIONS = {"horiz": "horizontal", "vert": "vertical", "diag": "diagonal"}

H_KERNEL = torch.tensor([[1.0, 0.0, -1.0]] * 3)
V_KERNEL = H_KERNEL.T.contiguous()
D_KERNEL = torch.tensor([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])
_BAND_KERNEL = {"horiz": H_KERNEL, "vert": V_KERNEL, "diag": D_KERNEL}


class CwnetModel(nn.Module):
    def __init__(self, cfg=None, init_seed=0, weights=None):
        super().__init__()
        self.cfg = cfg or schema.NetConfig()
        values = weights or schema.init_weights(self.cfg, seed=init_seed)
        self._index = {}
        params = []
        for name, shape, _ in schema.tensor_specs(self.cfg):
            if name not in values:
                raise KeyError(f"missing tensor {name!r}")
            arr = np.asarray(values[name], dtype=np.float32)
            if tuple(arr.shape) != tuple(shape):
                raise ValueError(f"{name}: expected shape {shape}, got {arr.shape}")
            self._index[name] = len(params)
            params.append(nn.Parameter(torch.from_numpy(arr.copy())))
        self.flat = nn.ParameterList(params)

    def p(self, name):
        return self.flat[self._index[name]]

    def export(self):
        """Name -> float32 numpy array, in schema order."""
        return {name: self.p(name).detach().cpu().numpy().copy()
                for name in self._index}

    # ---- blocks ----

    def _wtconv(self, x, prefix, level=0):
        if level == self.cfg.wt_levels:
            return torch.zeros_like(x)
        low, h, v, d = fn.dwt2(x)
        k = lambda band: self.p(f"{prefix}.level{level}.{band}")
        low2 = fn.depthwise(low, k("low")) + self._wtconv(low, prefix, level + 1)
        return fn.idwt2(low2, fn.depthwise(h, k("horiz")),
                        fn.depthwise(v, k("vert")), fn.depthwise(d, k("diag")))

    def _fe(self, bands, prefix):
        low, h, v, d = bands
        g = lambda s: self.p(f"{prefix}.{s}")
        low_out = (fn.depthwise(low, g("wtconv.base"))
                   + self._wtconv(low, f"{prefix}.wtconv")
                   + g("bias.low").view(1, -1, 1, 1))

        def detail(band, name):
            kern = _BAND_KERNEL[name].to(band.dtype)
            fixed = fn.depthwise(low_out,
                                 kern.expand(band.shape[1], 3, 3).contiguous())
            return (fn.depthwise(band, g(f"{name}.depthwise"))
                    + fn.pointwise(fixed, g(f"{name}.mix"))
                    + g(f"bias.{name}").view(1, -1, 1, 1))

        return (low_out, detail(h, "horiz"), detail(v, "vert"), detail(d, "diag"))

    def _hf_block(self, x, prefix, direction):
        g = lambda s: self.p(f"{prefix}.{s}")
        c = x.shape[1]
        u = fn.channel_layer_norm(x, g("ln1.scale"), g("ln1.shift"))
        z = fn.pointwise(u, g("vssm.in_proj.weight"), g("vssm.in_proj.bias"))
        main, gate = z[:, :2 * c], z[:, 2 * c:]
        main = fn.depthwise(main, g("vssm.conv.weight"), g("vssm.conv.bias"))
        main = F.silu(main)
        main = fn.directional_scan(
            main, direction,
            g("vssm.ssm.a_log"), g("vssm.ssm.d"),
            g("vssm.ssm.delta.weight"), g("vssm.ssm.delta.bias"),
            g("vssm.ssm.b.weight"), g("vssm.ssm.c.weight"))
        v = fn.pointwise(main * F.silu(gate),
                         g("vssm.out_proj.weight"), g("vssm.out_proj.bias")) + x
        w = fn.channel_layer_norm(v, g("ln2.scale"), g("ln2.shift"))
        f = fn.pointwise(w, g("ffn.expand.weight"), g("ffn.expand.bias"))
        f = f[:, :c] * f[:, c:]
        return fn.pointwise(f, g("ffn.project.weight"), g("ffn.project.bias")) + v

    def _ffc(self, x, prefix):
        spec = torch.fft.fft2(x, dim=(-2, -1))
        stacked = torch.cat([spec.real, spec.imag], dim=1)
        mixed = F.relu(fn.pointwise(stacked, self.p(f"{prefix}.weight"),
                                    self.p(f"{prefix}.bias")))
        c = mixed.shape[1] // 2
        out = torch.complex(mixed[:, :c], mixed[:, c:])
        return torch.fft.ifft2(out, dim=(-2, -1)).real

    def _lfeb_block(self, x, prefix):
        g = lambda s: self.p(f"{prefix}.{s}")
        t = self._ffc(x, f"{prefix}.ffc1")
        t = fn.depthwise_mult2(t, g("conv5.weight"), g("conv5.bias"))
        c = t.shape[1] // 2
        t = t[:, :c] * t[:, c:]
        y1 = x + fn.pointwise(t, g("proj.weight"), g("proj.bias"))

        u = self._ffc(y1, f"{prefix}.ffc2")
        u = fn.pointwise(u, g("expand.weight"), g("expand.bias"))
        c = u.shape[1] // 2
        u = u[:, :c] * u[:, c:]
        return y1 + fn.pointwise(u, g("compress.weight"), g("compress.bias"))

    def hfrb(self, x, stage):
        p = f"stage{stage}.hfrb0"
        bands = self._fe(fn.dwt2(x), f"{p}.fe")
        low, details = bands[0], list(bands[1:])
        for i, band in enumerate(schema.BANDS):
            feat = details[i]
            for j in range(self.cfg.hf_blocks[stage]):
                feat = self._hf_block(feat, f"{p}.{band}{j}", _DIRECTIONS[band])
            details[i] = feat
        merged = fn.idwt2(low, *details)
        for j in range(self.cfg.lf_blocks[stage]):
            merged = self._lfeb_block(merged, f"{p}.lfeb{j}")
        return merged

    def _pad(self, x):
        m = self.cfg.pad_multiple
        pad_h = (-x.shape[-2]) % m
        pad_w = (-x.shape[-1]) % m
        return fn.reflect_pad(x, 0, pad_w, 0, pad_h)

    def encode(self, img):
        """Stem + encoder + bottleneck activation for (B, 3, H, W) input."""
        x = self._pad(img)
        feat = fn.conv2d_same(x, self.p("stem.weight"), self.p("stem.bias"))
        skips = []
        for i in range(self.cfg.downsamples):
            feat = self.hfrb(feat, i)
            skips.append(feat)
            feat = fn.conv2d_same(feat, self.p(f"down{i}.weight"),
                                  self.p(f"down{i}.bias"), stride=2)
        feat = self.hfrb(feat, self.cfg.downsamples)
        return x, feat, skips

    def forward(self, img):
        h, w = img.shape[-2], img.shape[-1]
        x, feat, skips = self.encode(img)
        for i in range(self.cfg.downsamples):
            stage = self.cfg.downsamples + 1 + i
            feat = fn.pointwise(fn.upsample_nearest2(feat),
                                self.p(f"up{i}.weight"), self.p(f"up{i}.bias"))
            feat = feat + skips[self.cfg.downsamples - 1 - i]
            feat = self.hfrb(feat, stage)
        out = fn.conv2d_same(feat, self.p("head.weight"), self.p("head.bias"))
        return (out + x)[:, :, :h, :w]

    def features(self, img):
        return self.encode(img)[1]

    @torch.no_grad()
    def probe_activations(self, img):
        """Instrumented single-image forward for fixture export.

        Returns HWC numpy arrays for the full forward plus the stage-0
        restoration block and its first horizontal-scan and spectral
        sub-blocks (inputs and outputs).
        """
        def hwc(t):
            return t[0].permute(1, 2, 0).cpu().numpy().astype(np.float32)

        record = {}
        x = self._pad(img)
        feat = fn.conv2d_same(x, self.p("stem.weight"), self.p("stem.bias"))
        record["stage0.pre"] = hwc(feat)
        record["stage0.hfrb_forward"] = hwc(self.hfrb(feat, 0))

        bands = self._fe(fn.dwt2(feat), "stage0.hfrb0.fe")
        record["stage0.hband.pre"] = hwc(bands[1])
        record["stage0.hband.post"] = hwc(
            self._hf_block(bands[1], "stage0.hfrb0.horiz0", "horizontal"))

        low, details = bands[0], list(bands[1:])
        for i, band in enumerate(schema.BANDS):
            f2 = details[i]
            for j in range(self.cfg.hf_blocks[0]):
                f2 = self._hf_block(f2, f"stage0.hfrb0.{band}{j}",
                                    _DIRECTIONS[band])
            details[i] = f2
        merged = fn.idwt2(low, *details)
        record["stage0.lfeb.pre"] = hwc(merged)
        record["stage0.lfeb.post"] = hwc(
            self._lfeb_block(merged, "stage0.hfrb0.lfeb0"))

        record["network_forward"] = hwc(self.forward(img))
        return record
