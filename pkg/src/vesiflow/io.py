"""File formats: raw height snapshots, diagnostics CSV, run manifest.

Snapshot layout (little endian): 8-byte magic ``b"VESIHGT\\0"``, int64 format
version, int64 ``N``, float64 ``L``, then ``N*N`` float64 heights in row-major
order with axis 0 being x1.
"""

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .fields import HeightField

SNAPSHOT_MAGIC = b"VESIHGT\0"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<8sqqd")


class SnapshotFormatError(ValueError):
    pass


def write_snapshot(path, h: HeightField) -> Path:
    path = Path(path)
    header = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, h.n, float(h.length))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(h.values, dtype="<f8").tobytes())
    return path


def read_snapshot(path) -> HeightField:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise SnapshotFormatError(f"{path}: shorter than the {_HEADER.size}-byte header")
    magic, version, n, length = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise SnapshotFormatError(f"{path}: unsupported version {version}")
    if n < 4 or n % 2 or not length > 0:
        raise SnapshotFormatError(f"{path}: invalid grid N={n}, L={length}")
    body = data[_HEADER.size:]
    if len(body) != 8 * n * n:
        raise SnapshotFormatError(f"{path}: expected {8 * n * n} data bytes, found {len(body)}")
    values = np.frombuffer(body, dtype="<f8").reshape(n, n)
    try:
        return HeightField(values, length)
    except ValueError as exc:
        raise SnapshotFormatError(f"{path}: {exc}") from exc


def snapshot_name(t: float) -> str:
    return f"height_{t:.9g}.bin"


def format_float(x) -> str:
    return repr(float(x))


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_manifest(path, manifest: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
