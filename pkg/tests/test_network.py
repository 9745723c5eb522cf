import numpy as np
import pytest

from cwnet import rng
from cwnet.archive import WeightArchive, load_archive, save_archive
from cwnet.errors import ShapeMismatch, WeightMissing
from cwnet.network import (
    NetworkConfig,
    config_from_archive,
    extract_features,
    hfrb_forward,
    network_forward,
    parameter_count,
    random_init,
    stage_weights,
    tensor_specs,
)

SMALL = NetworkConfig(base_channels=4, lf_blocks=(1, 1, 1), hf_blocks=(1, 1, 1),
                      state_dim=2, wt_levels=2)


def count_oracle(cfg):
    """Closed-form parameter count, derived independently of tensor_specs."""
    def fe(c):
        return 3 * c * c + (25 * c + 4 * 25 * c * cfg.wt_levels) + 3 * 9 * c + 4 * c

    def hf(c):
        return 13 * c * c + (36 + 6 * cfg.state_dim) * c

    def lfeb(c):
        return 15 * c * c + 62 * c

    total = 0
    for s in range(cfg.stages):
        c = cfg.stage_channels(s)
        total += fe(c) + 3 * cfg.hf_blocks[s] * hf(c) + cfg.lf_blocks[s] * lfeb(c)
    c = cfg.base_channels
    total += (c * 27 + c) + (27 * c + 3)  # stem + head
    for i in range(cfg.downsamples):
        ci = cfg.stage_channels(i)
        total += 2 * ci * ci * 9 + 2 * ci      # down conv
        total += 2 * ci * ci + ci              # up 1x1 (mirror stage)
    return total


class TestConfig:
    def test_stage_channels(self):
        cfg = NetworkConfig()
        assert [cfg.stage_channels(s) for s in range(5)] == [16, 32, 64, 32, 16]

    def test_pad_multiple(self):
        assert NetworkConfig().pad_multiple == 64
        assert SMALL.pad_multiple == 16

    def test_mismatched_blocks_rejected(self):
        with pytest.raises(ShapeMismatch):
            NetworkConfig(lf_blocks=(1, 2), hf_blocks=(1, 2, 1))


class TestParameterCount:
    def test_default_in_budget(self):
        n = parameter_count(NetworkConfig())
        assert 0.86e6 <= n <= 1.60e6

    def test_exact_value_stable(self):
        assert parameter_count(NetworkConfig()) == 1_050_691

    def test_matches_closed_form(self):
        for cfg in (NetworkConfig(), SMALL,
                    NetworkConfig(base_channels=8, lf_blocks=(2, 1, 2),
                                  hf_blocks=(1, 3, 1), state_dim=4)):
            assert parameter_count(cfg) == count_oracle(cfg)

    def test_archive_total_matches(self):
        w = random_init(SMALL, seed=3)
        assert w.parameter_count() == parameter_count(SMALL)

    def test_names_unique(self):
        names = [n for n, _, _ in tensor_specs(NetworkConfig())]
        assert len(names) == len(set(names))


class TestRandomInit:
    def test_deterministic(self):
        a = random_init(SMALL, seed=11)
        b = random_init(SMALL, seed=11)
        assert list(a) == list(b)
        assert all(np.array_equal(a[k], b[k]) for k in a)

    def test_seeds_differ(self):
        a = random_init(SMALL, seed=11)
        b = random_init(SMALL, seed=12)
        assert any(not np.array_equal(a[k], b[k]) for k in a)

    def test_a_log_range(self):
        w = random_init(SMALL, seed=13)
        a = -np.exp(w["stage0.hfrb0.horiz0.vssm.ssm.a_log"])
        assert np.all(a >= -1.0) and np.all(a <= -0.5)

    def test_forward_finite(self):
        w = random_init(SMALL, seed=14)
        img = rng.uniform(15, 40 * 40 * 3).reshape(40, 40, 3).astype(np.float32)
        out = network_forward(img, w, SMALL)
        assert np.all(np.isfinite(out))


class TestForward:
    def test_shape_preserved(self):
        w = random_init(SMALL, seed=20)
        for h, wd in ((32, 32), (33, 47), (40, 64)):
            img = rng.uniform_range(rng.fold_seed(21, h * wd), (h, wd, 3),
                                    0.0, 1.0).astype(np.float32)
            assert network_forward(img, w, SMALL).shape == (h, wd, 3)

    def test_zero_weights_identity(self):
        zero = WeightArchive({name: np.zeros(shape, dtype=np.float32)
                              for name, shape, _ in tensor_specs(SMALL)})
        img = rng.uniform(22, 48 * 32 * 3).reshape(48, 32, 3).astype(np.float32)
        out = network_forward(img, zero, SMALL)
        assert np.array_equal(out, img)

    def test_deterministic_bitwise(self):
        w = random_init(SMALL, seed=23)
        img = rng.uniform(24, 32 * 32 * 3).reshape(32, 32, 3).astype(np.float32)
        a = network_forward(img, w, SMALL)
        b = network_forward(img, w, SMALL)
        assert np.array_equal(a, b)

    def test_wrong_channels_rejected(self):
        w = random_init(SMALL, seed=25)
        with pytest.raises(ShapeMismatch):
            network_forward(np.zeros((32, 32, 1), dtype=np.float32), w, SMALL)

    def test_missing_weight(self):
        w = random_init(SMALL, seed=26)
        del w.tensors["stage1.hfrb0.lfeb0.proj.weight"]
        img = np.zeros((32, 32, 3), dtype=np.float32)
        with pytest.raises(WeightMissing):
            network_forward(img, w, SMALL)


class TestHfrb:
    def test_zero_weights_match_composition(self):
        zero = WeightArchive({name: np.zeros(shape, dtype=np.float32)
                              for name, shape, _ in tensor_specs(SMALL)})
        sw = stage_weights(zero, SMALL, 0)
        x = rng.gaussian(30, (16, 16, SMALL.base_channels)).astype(np.float32)
        # zero FE annihilates every band, scan blocks preserve zero, the
        # reconstruction of zero bands is zero, and zero LFEBs keep it zero
        out = hfrb_forward(x, sw, SMALL, 0)
        np.testing.assert_allclose(out, 0.0, atol=0.0)

    def test_shape_contract(self):
        w = random_init(SMALL, seed=31)
        sw = stage_weights(w, SMALL, 1)
        c = SMALL.stage_channels(1)
        x = rng.gaussian(32, (16, 16, c)).astype(np.float32)
        assert hfrb_forward(x, sw, SMALL, 1).shape == x.shape


class TestArchiveIntegration:
    def test_roundtrip(self, tmp_path):
        w = random_init(SMALL, seed=40)
        p = tmp_path / "net.cwt"
        save_archive(w, p)
        back = load_archive(p)
        assert list(back) == list(w)
        assert all(np.array_equal(back[k], w[k]) for k in w)

    def test_config_from_archive(self):
        for cfg in (SMALL, NetworkConfig(base_channels=8, lf_blocks=(1, 2, 1),
                                         hf_blocks=(2, 1, 2), state_dim=4)):
            assert config_from_archive(random_init(cfg, seed=41)) == cfg

    def test_forward_with_inferred_config(self):
        w = random_init(SMALL, seed=42)
        img = rng.uniform(43, 32 * 32 * 3).reshape(32, 32, 3).astype(np.float32)
        a = network_forward(img, w, SMALL)
        b = network_forward(img, w)  # config inferred
        assert np.array_equal(a, b)


class TestExtractFeatures:
    def test_shape(self):
        w = random_init(SMALL, seed=50)
        img = rng.uniform(51, 32 * 32 * 3).reshape(32, 32, 3).astype(np.float32)
        feat = extract_features(img, w, SMALL)
        assert feat.shape == (16, 16, 2 * SMALL.base_channels)

    def test_default_config_shape_rule(self):
        cfg = NetworkConfig(base_channels=4, lf_blocks=(1, 1, 1, 1, 1),
                            hf_blocks=(1, 1, 1, 1, 1), state_dim=2, wt_levels=1)
        w = random_init(cfg, seed=52)
        img = rng.uniform(53, (cfg.pad_multiple * 2) ** 2 * 3).reshape(
            cfg.pad_multiple * 2, cfg.pad_multiple * 2, 3).astype(np.float32)
        feat = extract_features(img, w, cfg)
        assert feat.shape == (img.shape[0] // 4, img.shape[1] // 4,
                              4 * cfg.base_channels)

    def test_deterministic(self):
        w = random_init(SMALL, seed=54)
        img = rng.uniform(55, 32 * 32 * 3).reshape(32, 32, 3).astype(np.float32)
        assert np.array_equal(extract_features(img, w, SMALL),
                              extract_features(img, w, SMALL))
