"""Binary field snapshots.

Layout (little-endian)::

    magic        4 bytes   b"MCHF"
    version      u32       1
    dim          u32
    n            u32
    period       f64
    components   u32
    payload      components * n**dim float64, row-major, component-major

A State is stored as ``dim + 1`` components: the velocity components followed
by gamma.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .spectral import Grid

MAGIC = b"MCHF"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdI")


class SnapshotError(ValueError):
    pass


def encode(grid: Grid, components: np.ndarray) -> bytes:
    data = np.asarray(components, dtype="<f8")
    if data.shape == grid.shape:
        data = data[None]
    if data.shape[1:] != grid.shape:
        raise SnapshotError(f"component shape {data.shape[1:]} does not match grid {grid.shape}")
    header = _HEADER.pack(MAGIC, VERSION, grid.dim, grid.n, grid.period, data.shape[0])
    return header + np.ascontiguousarray(data).tobytes()


def decode(buf: bytes) -> tuple[Grid, np.ndarray]:
    if len(buf) < _HEADER.size:
        raise SnapshotError("truncated snapshot header")
    magic, version, dim, n, period, ncomp = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    grid = Grid(dim, n, period)
    count = ncomp * n**dim
    payload = buf[_HEADER.size :]
    if len(payload) != 8 * count:
        raise SnapshotError(f"payload has {len(payload)} bytes, expected {8 * count}")
    data = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return grid, data.reshape((ncomp,) + grid.shape)


def write(path, grid: Grid, components: np.ndarray) -> None:
    Path(path).write_bytes(encode(grid, components))


def read(path) -> tuple[Grid, np.ndarray]:
    return decode(Path(path).read_bytes())
