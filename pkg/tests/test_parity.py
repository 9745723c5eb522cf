"""Golden-fixture parity: the engine must reproduce trainer-exported
activations to 1e-4 max-abs.

Fixture archives live in tests/fixtures/parity/ (regenerate with
`cwnet-trainer export-fixtures --out-dir tests/fixtures/parity`). Each one
carries a full weight set plus `probe.*` tensors: the probe image and the
recorded outputs of the full forward, the stage-0 restoration block, its
first horizontal scan block, and its first spectral block."""

import glob
import os

import numpy as np
import pytest

from cwnet.archive import load_archive
from cwnet.lfeb import lfeb_block
from cwnet.network import (
    config_from_archive,
    hfrb_forward,
    network_forward,
    stage_weights,
    tensor_specs,
)
from cwnet.ssm import ScanDirection, hf_mamba_block

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures", "parity")
TOLERANCE = 1e-4


def fixture_paths():
    return sorted(glob.glob(os.path.join(FIXTURE_DIR, "probe*.cwt")))


pytestmark = pytest.mark.skipif(
    not fixture_paths(),
    reason="no parity fixtures present; run `cwnet-trainer export-fixtures`")


@pytest.fixture(scope="module", params=fixture_paths(),
                ids=lambda p: os.path.basename(p))
def fixture(request):
    archive = load_archive(request.param)
    cfg = config_from_archive(archive)
    return archive, cfg


def test_name_set_matches_engine_contract(fixture):
    archive, cfg = fixture
    weight_names = {n for n in archive if not n.startswith("probe.")}
    expected = {name for name, _, _ in tensor_specs(cfg)}
    assert weight_names == expected
    print(f"\nACCEPTANCE PASS: fixture archive names match the engine's "
          f"expected set ({len(expected)} tensors)")


def test_network_forward_parity(fixture):
    archive, cfg = fixture
    out = network_forward(archive["probe.image"], archive, cfg)
    err = float(np.max(np.abs(out - archive["probe.network_forward"])))
    assert err < TOLERANCE
    print(f"\nACCEPTANCE PASS: network_forward parity {err:.2e} < 1e-4")


def test_hfrb_forward_parity(fixture):
    archive, cfg = fixture
    sw = stage_weights(archive, cfg, 0)
    out = hfrb_forward(archive["probe.stage0.pre"], sw, cfg, 0)
    err = float(np.max(np.abs(out - archive["probe.stage0.hfrb_forward"])))
    assert err < TOLERANCE
    print(f"\nACCEPTANCE PASS: hfrb_forward parity {err:.2e} < 1e-4")


def test_hf_mamba_block_parity(fixture):
    archive, cfg = fixture
    sw = stage_weights(archive, cfg, 0)
    out = hf_mamba_block(archive["probe.stage0.hband.pre"],
                         sw.bands["horiz"][0], ScanDirection.HORIZONTAL)
    err = float(np.max(np.abs(out - archive["probe.stage0.hband.post"])))
    assert err < TOLERANCE
    print(f"\nACCEPTANCE PASS: hf_mamba_block parity {err:.2e} < 1e-4")


def test_lfeb_block_parity(fixture):
    archive, cfg = fixture
    sw = stage_weights(archive, cfg, 0)
    out = lfeb_block(archive["probe.stage0.lfeb.pre"], sw.lfeb[0])
    err = float(np.max(np.abs(out - archive["probe.stage0.lfeb.post"])))
    assert err < TOLERANCE
    print(f"\nACCEPTANCE PASS: lfeb_block parity {err:.2e} < 1e-4")


def test_trained_archive_loads_without_missing_weights():
    trained = os.path.join(FIXTURE_DIR, "trained_toy.cwt")
    if not os.path.isfile(trained):
        pytest.skip("trained toy archive not present")
    archive = load_archive(trained)
    cfg = config_from_archive(archive)
    expected = {name for name, _, _ in tensor_specs(cfg)}
    assert set(archive.tensors) == expected
    img = np.full((32, 32, 3), 0.25, dtype=np.float32)
    out = network_forward(img, archive, cfg)  # raises WeightMissing if short
    assert np.all(np.isfinite(out))
    print("\nACCEPTANCE PASS: trained archive loads with no missing names")
