import numpy as np
import pytest

from cwnet import rng
from cwnet.errors import OddDimension
from cwnet.wavelet import WaveletSubbands, WtConvConfig, dwt2, idwt2, wtconv


def delta_kernel(channels, k=3):
    w = np.zeros((channels, k, k), dtype=np.float32)
    w[:, k // 2, k // 2] = 1.0
    return w


def make_cfg(channels, levels, k=3, fill=None, seed=None):
    def kern(tag):
        if fill is not None:
            return np.full((channels, k, k), fill, dtype=np.float32)
        if seed is not None:
            return rng.gaussian(rng.fold_seed(seed, hash(tag) & 0xFFFF),
                                (channels, k, k)).astype(np.float32) * 0.3
        return delta_kernel(channels, k)
    base = kern("base")
    lvls = tuple({b: kern(f"{l}.{b}") for b in ("low", "horiz", "vert", "diag")}
                 for l in range(levels))
    return WtConvConfig(base=base, levels=lvls)


def wtconv_reference(x, cfg):
    """Nested-loop wtconv on float64: direct convolution, explicit recursion."""
    def conv_dw(img, w):
        h, wd, c = img.shape
        k = w.shape[1]
        m = k // 2
        pad = np.pad(img, ((m, m), (m, m), (0, 0)), mode="reflect")
        out = np.zeros_like(img, dtype=np.float64)
        for ch in range(c):
            for i in range(h):
                for j in range(wd):
                    acc = 0.0
                    for di in range(k):
                        for dj in range(k):
                            acc += w[ch, di, dj] * pad[i + di, j + dj, ch]
                    out[i, j, ch] = acc
        return out

    def analysis(img):
        a = img[0::2, 0::2]
        b = img[0::2, 1::2]
        c = img[1::2, 0::2]
        d = img[1::2, 1::2]
        return ((a + b + c + d) / 2, (a - b + c - d) / 2,
                (a + b - c - d) / 2, (a - b - c + d) / 2)

    def synthesis(lo, h, v, d):
        hh, ww, ch = lo.shape
        out = np.zeros((2 * hh, 2 * ww, ch))
        out[0::2, 0::2] = (lo + h + v + d) / 2
        out[0::2, 1::2] = (lo - h + v - d) / 2
        out[1::2, 0::2] = (lo + h - v - d) / 2
        out[1::2, 1::2] = (lo - h - v + d) / 2
        return out

    def cascade(img, level):
        if level == cfg.n_levels:
            return np.zeros_like(img)
        lo, h, v, d = analysis(img)
        k = cfg.levels[level]
        lo2 = conv_dw(lo, k["low"].astype(np.float64)) + cascade(lo, level + 1)
        return synthesis(lo2, conv_dw(h, k["horiz"].astype(np.float64)),
                         conv_dw(v, k["vert"].astype(np.float64)),
                         conv_dw(d, k["diag"].astype(np.float64)))

    x64 = x.astype(np.float64)
    return conv_dw(x64, cfg.base.astype(np.float64)) + cascade(x64, 0)


class TestDwt2:
    def test_constant_image(self):
        x = np.full((6, 8, 2), 0.3, dtype=np.float32)
        sb = dwt2(x)
        np.testing.assert_allclose(sb.low, 0.6, atol=1e-7)
        for band in (sb.horiz, sb.vert, sb.diag):
            np.testing.assert_allclose(band, 0.0, atol=1e-7)

    def test_hand_block(self):
        x = np.array([[1.0, 2.0], [3.0, 4.0]])[:, :, None]
        sb = dwt2(x)
        assert sb.low[0, 0, 0] == pytest.approx(5.0)
        assert sb.horiz[0, 0, 0] == pytest.approx(-1.0)
        assert sb.vert[0, 0, 0] == pytest.approx(-2.0)
        assert sb.diag[0, 0, 0] == pytest.approx(0.0)

    def test_odd_dims_rejected(self):
        with pytest.raises(OddDimension):
            dwt2(np.zeros((3, 4, 1)))

    def test_linearity(self):
        x = rng.gaussian(1, (8, 8, 3)).astype(np.float32)
        y = rng.gaussian(2, (8, 8, 3)).astype(np.float32)
        a, b = 1.7, -0.4
        lhs = dwt2(a * x + b * y)
        rx, ry = dwt2(x), dwt2(y)
        for band in ("low", "horiz", "vert", "diag"):
            np.testing.assert_allclose(
                getattr(lhs, band),
                a * getattr(rx, band) + b * getattr(ry, band), atol=1e-6)

    def test_energy_preservation(self):
        x = rng.gaussian(3, (16, 12, 2)).astype(np.float32)
        sb = dwt2(x)
        total = sum(float(np.sum(getattr(sb, b) ** 2))
                    for b in ("low", "horiz", "vert", "diag"))
        ref = float(np.sum(x.astype(np.float64) ** 2))
        assert total == pytest.approx(ref, rel=1e-4)


class TestIdwt2:
    def test_hand_inverse(self):
        sb = WaveletSubbands(
            low=np.array([[[5.0]]]), horiz=np.array([[[-1.0]]]),
            vert=np.array([[[-2.0]]]), diag=np.array([[[0.0]]]))
        np.testing.assert_allclose(idwt2(sb)[:, :, 0], [[1, 2], [3, 4]])

    def test_zero(self):
        sb = dwt2(np.zeros((4, 4, 1), dtype=np.float32))
        assert np.all(idwt2(sb) == 0)

    def test_roundtrip_64(self):
        x = rng.uniform(4, 64 * 64 * 3).reshape(64, 64, 3).astype(np.float32)
        err = np.max(np.abs(idwt2(dwt2(x)) - x))
        assert err < 1e-5

    def test_roundtrip_many(self):
        for i in range(20):
            h = 2 * int(rng.uniform_range(rng.fold_seed(5, i), (), 4, 64))
            w = 2 * int(rng.uniform_range(rng.fold_seed(6, i), (), 4, 64))
            c = int(rng.uniform_range(rng.fold_seed(7, i), (), 1, 9))
            x = rng.gaussian(rng.fold_seed(8, i), (h, w, c)).astype(np.float32)
            assert np.max(np.abs(idwt2(dwt2(x)) - x)) < 1e-5


class TestWtConv:
    def test_zero_input(self):
        cfg = make_cfg(2, levels=2, seed=10)
        assert np.all(wtconv(np.zeros((8, 8, 2), dtype=np.float32), cfg) == 0)

    def test_zero_kernels(self):
        cfg = make_cfg(2, levels=2, fill=0.0)
        x = rng.uniform(11, 8 * 8 * 2).reshape(8, 8, 2).astype(np.float32)
        assert np.all(wtconv(x, cfg) == 0)

    def test_delta_kernels_double(self):
        cfg = make_cfg(3, levels=1)
        x = rng.uniform(12, 8 * 8 * 3).reshape(8, 8, 3).astype(np.float32)
        np.testing.assert_allclose(wtconv(x, cfg), 2 * x, atol=1e-5)

    def test_matches_bruteforce(self):
        cfg = make_cfg(2, levels=2, seed=13)
        x = rng.uniform(14, 16 * 16 * 2).reshape(16, 16, 2).astype(np.float32)
        ref = wtconv_reference(x, cfg)
        assert np.max(np.abs(wtconv(x, cfg) - ref)) < 1e-5

    def test_indivisible_dims_rejected(self):
        cfg = make_cfg(1, levels=2, seed=15)
        with pytest.raises(OddDimension):
            wtconv(np.zeros((6, 8, 1), dtype=np.float32), cfg)
