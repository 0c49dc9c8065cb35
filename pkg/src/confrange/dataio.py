"""Tensor files, dataset manifests and calibration/test splitting.

Tensor layout (all integers little-endian)::

    offset  size      field
    0       4         magic b"CPRP"
    4       1         version (1)
    5       1         dtype (0 = float32, 1 = uint8)
    6       2         reserved, zero
    8       4         ndim (uint32)
    12      4*ndim    dims (uint32 each)
    ...               payload, row-major
"""

from __future__ import annotations

import csv
import math
import os
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ._rng import LCG
from .errors import (
    AlreadySplit,
    BadMagic,
    InvalidDims,
    ManifestError,
    TruncatedPayload,
    UnsupportedVersion,
    ValueOutOfRange,
)

MAGIC = b"CPRP"
VERSION = 1
FLOAT32 = 0
UINT8 = 1

_DTYPES = {FLOAT32: np.dtype("<f4"), UINT8: np.dtype("u1")}

QUALITY_LABELS = ("high", "low", "unknown")
SPLITS = ("calibration", "test", "unassigned")
MANIFEST_HEADER = ["image_id", "stack_path", "gt_path", "quality_label", "split"]


def _header_size(ndim: int) -> int:
    return 12 + 4 * ndim


def encode_tensor(array, dims=None, dtype: int | None = None) -> bytes:
    """Serialise ``array`` to the tensor byte layout."""
    arr = np.asarray(array)
    if dims is None:
        dims = arr.shape
    dims = tuple(int(d) for d in dims)
    if len(dims) == 0 or any(d <= 0 for d in dims):
        raise InvalidDims(f"dims must be a non-empty list of positive sizes, got {list(dims)}")
    if dtype is None:
        dtype = UINT8 if arr.dtype in (np.uint8, np.bool_) else FLOAT32
    if dtype not in _DTYPES:
        raise InvalidDims(f"unknown dtype code {dtype}")
    if arr.size != math.prod(dims):
        raise InvalidDims(f"array has {arr.size} values but dims {list(dims)} need {math.prod(dims)}")
    payload = np.ascontiguousarray(arr.reshape(dims), dtype=_DTYPES[dtype]).tobytes()
    header = MAGIC + struct.pack("<BBxxI", VERSION, dtype, len(dims)) + struct.pack(f"<{len(dims)}I", *dims)
    return header + payload


def write_tensor(path, array, dims=None, dtype: int | None = None) -> None:
    """Write ``array`` as a tensor file.

    ``dtype`` defaults to uint8 for boolean/uint8 arrays and float32
    otherwise.  Identical inputs always produce identical bytes.
    """
    data = encode_tensor(array, dims, dtype)
    with open(path, "wb") as fh:
        fh.write(data)


def decode_tensor(data: bytes, path=None, probabilities: bool = True) -> np.ndarray:
    if data[:4] != MAGIC:
        raise BadMagic(f"bad magic {data[:4]!r}", path, 0)
    if len(data) < 12:
        raise TruncatedPayload("header truncated", path, len(data))
    version, dtype, ndim = struct.unpack_from("<BBxxI", data, 4)
    if version != VERSION:
        raise UnsupportedVersion(f"version {version}", path, 4)
    if dtype not in _DTYPES:
        raise UnsupportedVersion(f"dtype code {dtype}", path, 5)
    hsize = _header_size(ndim)
    if len(data) < hsize:
        raise TruncatedPayload(f"header declares {ndim} dims", path, len(data))
    dims = struct.unpack_from(f"<{ndim}I", data, 12)
    if ndim == 0 or any(d == 0 for d in dims):
        raise InvalidDims(f"invalid dims {list(dims)} in {path}")
    itemsize = _DTYPES[dtype].itemsize
    need = math.prod(dims) * itemsize
    if len(data) - hsize < need:
        raise TruncatedPayload(f"payload needs {need} bytes, found {len(data) - hsize}", path, len(data))
    if len(data) - hsize > need:
        raise TruncatedPayload(f"{len(data) - hsize - need} trailing bytes after payload", path, hsize + need)
    arr = np.frombuffer(data, dtype=_DTYPES[dtype], count=math.prod(dims), offset=hsize).reshape(dims)

    if dtype == FLOAT32:
        bad = ~np.isfinite(arr)
        if probabilities:
            bad |= (arr < 0) | (arr > 1)
        if bad.any():
            idx = int(np.flatnonzero(bad)[0])
            value = arr.reshape(-1)[idx]
            raise ValueOutOfRange(f"value {value!r} outside [0, 1]", path, hsize + idx * itemsize)
    else:
        bad = arr > 1
        if bad.any():
            idx = int(np.flatnonzero(bad)[0])
            raise ValueOutOfRange(f"mask value {arr.reshape(-1)[idx]} not in {{0, 1}}", path, hsize + idx)
    return arr.copy()


def read_tensor(path, probabilities: bool = True) -> np.ndarray:
    """Read a tensor file into an array shaped by its declared dims.

    float32 payloads must be finite and, when ``probabilities`` is true,
    lie in [0, 1].  uint8 payloads must be binary masks.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    return decode_tensor(data, path, probabilities)


@dataclass(frozen=True)
class ManifestRecord:
    image_id: str
    stack_path: str
    gt_path: str
    quality_label: str = "unknown"
    split: str = "unassigned"

    def __post_init__(self):
        if self.quality_label not in QUALITY_LABELS:
            raise ManifestError(f"{self.image_id}: bad quality_label {self.quality_label!r}")
        if self.split not in SPLITS:
            raise ManifestError(f"{self.image_id}: bad split {self.split!r}")


@dataclass
class Manifest:
    """Ordered records plus the directory relative paths resolve against."""

    records: list[ManifestRecord]
    root: Path = field(default_factory=Path)

    def __post_init__(self):
        ids = [r.image_id for r in self.records]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ManifestError(f"duplicate image_id(s): {', '.join(dup)}")
        self.root = Path(self.root)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def resolve(self, relpath: str) -> Path:
        return self.root / relpath

    def subset(self, split: str) -> list[ManifestRecord]:
        return [r for r in self.records if r.split == split]

    def load_stack(self, record: ManifestRecord) -> np.ndarray:
        return read_tensor(self.resolve(record.stack_path))

    def load_gt(self, record: ManifestRecord) -> np.ndarray:
        return read_tensor(self.resolve(record.gt_path))


def read_manifest(path) -> Manifest:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError(f"{path}: empty manifest") from None
        if header != MANIFEST_HEADER:
            raise ManifestError(f"{path}: expected header {','.join(MANIFEST_HEADER)}, got {','.join(header)}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(MANIFEST_HEADER):
                raise ManifestError(f"{path}:{lineno}: expected {len(MANIFEST_HEADER)} fields, got {len(row)}")
            records.append(ManifestRecord(*row))
    return Manifest(records, root=path.parent)


def write_manifest(manifest: Manifest, path) -> None:
    """Write ``manifest`` as CSV; paths are stored as given (relative)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for r in manifest.records:
            writer.writerow([r.image_id, r.stack_path, r.gt_path, r.quality_label, r.split])


def calibration_count(n: int, calib_fraction: float) -> int:
    # round half up
    return int(math.floor(calib_fraction * n + 0.5))


def split_manifest(manifest: Manifest, calib_fraction: float = 0.2, seed: int = 0) -> Manifest:
    """Assign every record to the calibration or test split.

    Image ids are sorted, shuffled with the seeded LCG (Fisher-Yates) and
    the first ``round(calib_fraction * n)`` become calibration.  The result
    therefore depends only on the id set and ``seed``, not on record order.
    Record order in the returned manifest is preserved.
    """
    if not 0.0 < calib_fraction < 1.0:
        raise ValueError(f"calib_fraction must be in (0, 1), got {calib_fraction}")
    assigned = [r.image_id for r in manifest.records if r.split != "unassigned"]
    if assigned:
        raise AlreadySplit(f"{len(assigned)} record(s) already assigned, e.g. {assigned[0]!r}")
    order = LCG(seed).shuffle(sorted(r.image_id for r in manifest.records))
    calib = set(order[: calibration_count(len(order), calib_fraction)])
    records = [replace(r, split="calibration" if r.image_id in calib else "test") for r in manifest.records]
    return Manifest(records, root=manifest.root)


def relpath(path, start) -> str:
    return Path(os.path.relpath(path, start)).as_posix()
