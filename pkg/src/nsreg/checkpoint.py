"""Binary field checkpoints.

Layout (little-endian)::

    offset  size  field
    0       8     magic  b"NSREGCK\\0"
    8       4     version (uint32, currently 1)
    12      4     n (uint32)
    16      8     box_length (float64)
    24      8     time (float64; NaN when the field carries no time)
    32      4     component count (uint32, always 3)
    36      ...   payload: 3 * n^3 complex values as interleaved (re, im) float64

The payload walks components in order, then the k-lattice in row-major
order over (k1, k2, k3), each axis in FFT order (0, 1, ..., n/2, -n/2+1, ..., -1).
"""
from __future__ import annotations

import math
import os
import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .fields import GridSpec, SpectralVectorField

MAGIC = b"NSREGCK\0"
VERSION = 1
HEADER = struct.Struct("<8sIIddI")


def write_checkpoint(path: str | os.PathLike, f: SpectralVectorField) -> None:
    t = math.nan if f.time is None else float(f.time)
    header = HEADER.pack(MAGIC, VERSION, f.grid.n, f.grid.box_length, t, 3)
    payload = np.ascontiguousarray(f.coeffs, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_checkpoint(path: str | os.PathLike, dealias_fraction: float = 2.0 / 3.0) -> SpectralVectorField:
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise CheckpointError(f"header truncated: {len(data)} of {HEADER.size} bytes", len(data))
    magic, version, n, box_length, t, ncomp = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointError("bad magic", 0)
    if version != VERSION:
        raise CheckpointError(f"unsupported version {version}", 8)
    if n < 4 or n % 2:
        raise CheckpointError(f"invalid grid size n={n}", 12)
    if not box_length > 0:
        raise CheckpointError(f"invalid box length {box_length}", 16)
    if ncomp != 3:
        raise CheckpointError(f"expected 3 components, found {ncomp}", 32)
    expected = HEADER.size + 16 * 3 * n**3
    if len(data) != expected:
        off = min(len(data), expected)
        raise CheckpointError(
            f"payload size mismatch: file has {len(data)} bytes, expected {expected}", off
        )
    coeffs = np.frombuffer(data, dtype="<c16", offset=HEADER.size).reshape(3, n, n, n)
    bad = ~np.isfinite(coeffs)
    if bad.any():
        idx = int(np.flatnonzero(bad.ravel())[0])
        raise CheckpointError("non-finite coefficient", HEADER.size + 16 * idx)
    grid = GridSpec(n, box_length, dealias_fraction)
    return SpectralVectorField(grid, coeffs.astype(np.complex128), time=None if math.isnan(t) else t)
