import numpy as np
import pytest
import torch

from cwnet_trainer.model import CwnetModel
from cwnet_trainer.schema import NetConfig, init_weights, tensor_names, tensor_specs

TOY = NetConfig(base_channels=4, lf_blocks=(1, 1, 1), hf_blocks=(1, 1, 1),
                state_dim=2, wt_levels=2)


class TestSchema:
    def test_names_unique_and_ordered(self):
        names = tensor_names(TOY)
        assert len(names) == len(set(names))
        assert names[0] == "stem.weight" and names[-1] == "head.bias"

    def test_init_deterministic(self):
        a = init_weights(TOY, seed=5)
        b = init_weights(TOY, seed=5)
        assert all(np.array_equal(a[k], b[k]) for k in a)

    def test_pad_multiple(self):
        assert TOY.pad_multiple == 2 * 2 * 4
        assert NetConfig().pad_multiple == 2 * 2 * 8


class TestModel:
    def test_export_roundtrip(self):
        model = CwnetModel(TOY, init_seed=3)
        out = model.export()
        again = CwnetModel(TOY, weights=out).export()
        assert all(np.array_equal(out[k], again[k]) for k in out)
        assert list(out) == tensor_names(TOY)

    def test_zero_weights_identity(self):
        zeros = {name: np.zeros(shape, dtype=np.float32)
                 for name, shape, _ in tensor_specs(TOY)}
        model = CwnetModel(TOY, weights=zeros).eval()
        img = torch.rand(1, 3, 32, 24)
        with torch.no_grad():
            out = model(img)
        assert torch.equal(out, img)

    def test_forward_shape_and_determinism(self):
        model = CwnetModel(TOY, init_seed=4).eval()
        img = torch.rand(2, 3, 20, 28)
        with torch.no_grad():
            a = model(img)
            b = model(img)
        assert a.shape == img.shape
        assert torch.equal(a, b)
        assert torch.isfinite(a).all()

    def test_gradients_flow_everywhere(self):
        model = CwnetModel(TOY, init_seed=5)
        img = torch.rand(1, 3, 16, 16)
        loss = model(img).square().mean()
        loss.backward()
        missing = [name for name in model._index
                   if model.p(name).grad is None
                   or not torch.isfinite(model.p(name).grad).all()]
        assert missing == []

    def test_missing_tensor_rejected(self):
        weights = init_weights(TOY, seed=6)
        weights.pop("head.bias")
        with pytest.raises(KeyError):
            CwnetModel(TOY, weights=weights)

    def test_probe_activations_keys(self):
        model = CwnetModel(TOY, init_seed=7).eval()
        img = torch.rand(1, 3, 16, 16)
        rec = model.probe_activations(img)
        assert set(rec) == {"stage0.pre", "stage0.hfrb_forward",
                            "stage0.hband.pre", "stage0.hband.post",
                            "stage0.lfeb.pre", "stage0.lfeb.post",
                            "network_forward"}
        assert rec["network_forward"].shape == (16, 16, 3)
