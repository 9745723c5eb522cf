"""Trainer-side reader/writer for the engine's weight-archive file format.

Byte layout (little-endian, no padding): magic "CWNT", u32 version=1,
u64 tensor count, then per tensor u16 name length, UTF-8 name, u8 rank,
rank*u64 dims, f32 data; a trailing u32 CRC32 covers everything before it.
This is an independent implementation of the published contract; files it
writes must load bit-exactly in the engine and vice versa.
"""

import struct
import zlib

import numpy as np

MAGIC = b"CWNT"
VERSION = 1


class ArchiveError(Exception):
    pass


def write_archive(tensors, path):
    """`tensors` is an ordered name -> array mapping; arrays become f32."""
    parts = [MAGIC, struct.pack("<IQ", VERSION, len(tensors))]
    for name, value in tensors.items():
        arr = np.ascontiguousarray(value, dtype="<f4")
        if not np.all(np.isfinite(arr)):
            raise ArchiveError(f"tensor {name!r} contains non-finite values")
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        parts.append(arr.tobytes())
    body = b"".join(parts)
    with open(path, "wb") as fh:
        fh.write(body + struct.pack("<I", zlib.crc32(body)))


def read_archive(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ArchiveError("bad magic")
    body = blob[:-4]
    (crc,) = struct.unpack("<I", blob[-4:])
    version, count = struct.unpack("<IQ", body[4:16])
    if version != VERSION:
        raise ArchiveError(f"unsupported version {version}")

    tensors = {}
    off = 16
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", body, off)
        off += 2
        name = body[off:off + name_len].decode("utf-8")
        off += name_len
        (rank,) = struct.unpack_from("<B", body, off)
        off += 1
        dims = struct.unpack_from(f"<{rank}Q", body, off)
        off += 8 * rank
        n = int(np.prod(dims, dtype=np.uint64)) if rank else 1
        tensors[name] = np.frombuffer(body, dtype="<f4", count=n,
                                      offset=off).reshape(dims).copy()
        off += 4 * n
    if off != len(body) or zlib.crc32(body) != crc:
        raise ArchiveError("archive is truncated or corrupt")
    return tensors
