"""On-disk sphere caches.

Layout (little endian)::

    magic     8 bytes  b"STHYSPH\\0"
    version   u16
    flags     u16      bit 0: counts only
    spec      u32 length + utf-8 group string
    radius    u32
    count     u64
    digest    u64      dataset checksum of the ordered encodings
    elements  count x (u32 length + canonical encoding), omitted if counts only
    checksum  u64      blake2b-64 of every preceding byte
"""
from __future__ import annotations

import hashlib
import os
import re
import struct
from pathlib import Path

from .groups import GroupSpec, as_spec, parse_group
from .spheres import SphereDataset, dataset_checksum

MAGIC = b"STHYSPH\0"
VERSION = 1
FLAG_COUNTS_ONLY = 1
CACHE_ENV = "STATHYP_CACHE_DIR"


class CacheError(RuntimeError):
    pass


class ChecksumError(CacheError):
    pass


class VersionError(CacheError):
    pass


class SpecMismatchError(CacheError):
    pass


def _digest(data: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def serialize(dataset: SphereDataset) -> bytes:
    spec = str(dataset.spec).encode()
    flags = FLAG_COUNTS_ONLY if dataset.counts_only else 0
    out = bytearray(MAGIC)
    out += struct.pack("<HHI", VERSION, flags, len(spec)) + spec
    out += struct.pack("<IQQ", dataset.radius, dataset.count, dataset.checksum)
    if not dataset.counts_only:
        for enc in dataset.encodings():
            out += struct.pack("<I", len(enc)) + enc
    out += struct.pack("<Q", _digest(bytes(out)))
    return bytes(out)


def deserialize(data: bytes, expected_spec: GroupSpec | str | None = None) -> SphereDataset:
    if len(data) < len(MAGIC) + 8 or data[: len(MAGIC)] != MAGIC:
        raise CacheError("not a sphere cache file")
    body, (stored,) = data[:-8], struct.unpack("<Q", data[-8:])
    version, flags, slen = struct.unpack_from("<HHI", data, len(MAGIC))
    if version != VERSION:
        raise VersionError(f"cache version {version}, expected {VERSION}")
    if _digest(body) != stored:
        raise ChecksumError("cache checksum mismatch (truncated or corrupted file)")
    pos = len(MAGIC) + 8
    spec_text = body[pos:pos + slen].decode()
    pos += slen
    spec = parse_group(spec_text)
    if expected_spec is not None and as_spec(expected_spec) != spec:
        raise SpecMismatchError(f"cache holds {spec}, expected {as_spec(expected_spec)}")
    radius, count, digest = struct.unpack_from("<IQQ", body, pos)
    pos += 20
    if flags & FLAG_COUNTS_ONLY:
        if pos != len(body):
            raise CacheError("unexpected element section in counts-only cache")
        ds = SphereDataset.build(spec, radius, count=count)
    else:
        encs = []
        for _ in range(count):
            (size,) = struct.unpack_from("<I", body, pos)
            encs.append(bytes(body[pos + 4:pos + 4 + size]))
            pos += 4 + size
        if pos != len(body):
            raise CacheError("trailing bytes after element section")
        if dataset_checksum(radius, count, encs) != digest:
            raise ChecksumError("dataset checksum mismatch")
        ds = SphereDataset(spec, radius, count, tuple(spec.decode(e) for e in encs), digest)
    if ds.checksum != digest:
        raise ChecksumError("dataset checksum mismatch")
    return ds


def cache_store(dataset: SphereDataset, path: str | os.PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(serialize(dataset))
    os.replace(tmp, path)


def cache_load(path: str | os.PathLike, expected_spec: GroupSpec | str | None = None) -> SphereDataset:
    return deserialize(Path(path).read_bytes(), expected_spec)


def cache_dir(override: str | os.PathLike | None = None) -> Path | None:
    value = override or os.environ.get(CACHE_ENV)
    return Path(value) if value else None


def cache_path(directory: str | os.PathLike, spec: GroupSpec | str, n: int, counts_only: bool = False) -> Path:
    name = re.sub(r"[^A-Za-z0-9]+", "_", str(as_spec(spec))).strip("_")
    return Path(directory) / f"{name}.n{n}{'.counts' if counts_only else ''}.sph"
