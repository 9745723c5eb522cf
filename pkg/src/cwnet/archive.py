"""Named-tensor archive with a bit-exact little-endian file format.

Layout:

    magic   4 bytes  "CWNT"
    version u32      (currently 1)
    count   u64      number of tensors
    per tensor:
        name_len u16, name (UTF-8), rank u8, dims rank*u64, data f32*prod(dims)
    footer  u32      CRC32 of every preceding byte

No alignment padding anywhere. Tensor order is preserved, so a save/load
round trip is byte-identical.
"""

import struct
import zlib

import numpy as np

from .errors import BadMagic, ChecksumMismatch, Truncated, UnsupportedVersion

MAGIC = b"CWNT"
VERSION = 1


class WeightArchive:
    """Ordered mapping of tensor names to float32 arrays."""

    def __init__(self, tensors=None):
        self.tensors = {}
        if tensors:
            for name, value in tensors.items():
                self[name] = value

    def __setitem__(self, name, value):
        arr = np.ascontiguousarray(value, dtype=np.float32)
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"tensor {name!r} contains non-finite values")
        self.tensors[name] = arr

    def __getitem__(self, name):
        return self.tensors[name]

    def __contains__(self, name):
        return name in self.tensors

    def __iter__(self):
        return iter(self.tensors)

    def __len__(self):
        return len(self.tensors)

    def items(self):
        return self.tensors.items()

    def parameter_count(self):
        return sum(int(t.size) for t in self.tensors.values())

    def to_bytes(self):
        parts = [MAGIC, struct.pack("<IQ", VERSION, len(self.tensors))]
        for name, tensor in self.tensors.items():
            encoded = name.encode("utf-8")
            parts.append(struct.pack("<H", len(encoded)))
            parts.append(encoded)
            parts.append(struct.pack("<B", tensor.ndim))
            parts.append(struct.pack(f"<{tensor.ndim}Q", *tensor.shape))
            parts.append(tensor.astype("<f4", copy=False).tobytes())
        body = b"".join(parts)
        return body + struct.pack("<I", zlib.crc32(body))

    @classmethod
    def from_bytes(cls, blob):
        # Structural errors (Truncated) are diagnosed before the checksum so
        # that a cut-off file is reported as truncated, not merely corrupt.
        if len(blob) < 4 or blob[:4] != MAGIC:
            raise BadMagic("not a weight archive (bad magic bytes)")
        if len(blob) < 20:
            raise Truncated("archive shorter than its fixed header")
        body = blob[:-4]

        version, count = struct.unpack("<IQ", body[4:16])
        if version != VERSION:
            raise UnsupportedVersion(f"archive version {version}, expected {VERSION}")

        archive = cls()
        off = 16

        def take(n, what):
            nonlocal off
            if off + n > len(body):
                raise Truncated(f"archive ends inside {what}")
            chunk = body[off:off + n]
            off += n
            return chunk

        for _ in range(count):
            (name_len,) = struct.unpack("<H", take(2, "a tensor name length"))
            name = take(name_len, "a tensor name").decode("utf-8")
            (rank,) = struct.unpack("<B", take(1, "a tensor rank"))
            dims = struct.unpack(f"<{rank}Q", take(8 * rank, "tensor dims"))
            n_vals = int(np.prod(dims, dtype=np.uint64)) if rank else 1
            raw = take(4 * n_vals, f"tensor {name!r} data")
            archive.tensors[name] = np.frombuffer(raw, dtype="<f4").reshape(dims).copy()
        if off != len(body):
            raise Truncated(f"{len(body) - off} trailing bytes after the last tensor")

        (crc,) = struct.unpack("<I", blob[-4:])
        if zlib.crc32(body) != crc:
            raise ChecksumMismatch("archive CRC32 does not match its contents")
        return archive


def save_archive(archive, path):
    with open(path, "wb") as fh:
        fh.write(archive.to_bytes())


def load_archive(path):
    """Read and verify an archive; raises BadMagic / UnsupportedVersion /
    ChecksumMismatch / Truncated on malformed files."""
    with open(path, "rb") as fh:
        return WeightArchive.from_bytes(fh.read())
