import struct

import numpy as np
import pytest

from cwnet import rng
from cwnet.archive import WeightArchive, load_archive, save_archive
from cwnet.errors import BadMagic, ChecksumMismatch, Truncated, UnsupportedVersion


def random_archive(seed=0):
    a = WeightArchive()
    a["alpha.weight"] = rng.gaussian(rng.fold_seed(seed, 1), (4, 3, 3, 3))
    a["alpha.bias"] = rng.gaussian(rng.fold_seed(seed, 2), (4,))
    a["beta"] = rng.gaussian(rng.fold_seed(seed, 3), (2, 8))
    a["scalarish"] = np.float32(1.5)
    return a


class TestRoundtrip:
    def test_bit_exact(self, tmp_path):
        a = random_archive()
        p = tmp_path / "w.cwt"
        save_archive(a, p)
        b = load_archive(p)
        assert list(a) == list(b)
        for name in a:
            assert np.array_equal(a[name], b[name])
            assert a[name].shape == b[name].shape

    def test_bytes_stable(self):
        a = random_archive()
        assert a.to_bytes() == WeightArchive.from_bytes(a.to_bytes()).to_bytes()

    def test_rejects_nonfinite(self):
        a = WeightArchive()
        with pytest.raises(ValueError):
            a["bad"] = np.array([np.nan], dtype=np.float32)

    def test_parameter_count(self):
        assert random_archive().parameter_count() == 4 * 27 + 4 + 16 + 1


class TestCorruption:
    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.cwt"
        blob = random_archive().to_bytes()
        p.write_bytes(b"XXXX" + blob[4:])
        with pytest.raises(BadMagic):
            load_archive(p)

    def test_truncated_mid_tensor(self, tmp_path):
        p = tmp_path / "cut.cwt"
        blob = random_archive().to_bytes()
        p.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(Truncated):
            load_archive(p)

    def test_flipped_bit_checksum(self, tmp_path):
        p = tmp_path / "flip.cwt"
        blob = bytearray(random_archive().to_bytes())
        blob[100] ^= 0x01  # inside the first tensor's f32 payload
        p.write_bytes(bytes(blob))
        with pytest.raises(ChecksumMismatch):
            load_archive(p)

    def test_unsupported_version(self, tmp_path):
        a = random_archive()
        blob = bytearray(a.to_bytes())
        blob[4:8] = struct.pack("<I", 9)
        # keep structure valid: recompute nothing, version is checked first
        p = tmp_path / "v9.cwt"
        p.write_bytes(bytes(blob))
        with pytest.raises(UnsupportedVersion):
            load_archive(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "empty.cwt"
        p.write_bytes(b"")
        with pytest.raises(BadMagic):
            load_archive(p)
