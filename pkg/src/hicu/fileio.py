"""Binary file formats and the trace CSV.

Two little-endian binary formats, both with an 8-byte ASCII magic:

``HICUKSP1`` (multi-coil k-space)
    magic, u32 nx, u32 ny, u32 nc, then nx*ny*nc complex values as
    interleaved float32 (re, im) pairs, x fastest, then y, then coil.

``HICUMSK1`` (sampling mask)
    magic, u32 nx, u32 ny, then nx*ny bytes, each 0 or 1, x fastest.

The same payload layout (with a different magic) is used by the denoiser
wire protocol in `hicu.denoise`.

Trace files are plain CSV with header
``wall_time_s,outer,inner,cost,eta,snr_db``.
"""
from __future__ import annotations

import csv
import struct

import numpy as np

from .arrays import MultiCoilKSpace, SamplingMask, as_kspace_array, as_mask_array
from .errors import FileFormatError

KSPACE_MAGIC = b"HICUKSP1"
MASK_MAGIC = b"HICUMSK1"
TRACE_HEADER = ["wall_time_s", "outer", "inner", "cost", "eta", "snr_db"]

_MAX_DIM = 2**20  # sanity bound on any single header dimension


def pack_complex_grid(arr: np.ndarray) -> bytes:
    """Serialize an (nx, ny, nc) complex array: float32 (re, im) pairs,
    linear index x + nx*y + nx*ny*c."""
    flat = np.ascontiguousarray(arr.transpose(2, 1, 0)).astype("<c8")
    return flat.tobytes()


def unpack_complex_grid(payload: bytes, nx: int, ny: int, nc: int) -> np.ndarray:
    """Inverse of `pack_complex_grid`; returns complex128 (nx, ny, nc)."""
    expected = nx * ny * nc * 8
    if len(payload) != expected:
        raise FileFormatError(
            f"payload holds {len(payload)} bytes, expected {expected}"
        )
    flat = np.frombuffer(payload, dtype="<c8")
    grid = flat.reshape(nc, ny, nx).transpose(2, 1, 0)
    return grid.astype(np.complex128)


def _check_dims(*dims) -> None:
    for d in dims:
        if not 1 <= d <= _MAX_DIM:
            raise FileFormatError(f"unreasonable dimension {d} in header")


def write_kspace(path, kspace) -> None:
    """Write multi-coil k-space in the HICUKSP1 format."""
    arr = as_kspace_array(kspace)
    nx, ny, nc = arr.shape
    with open(path, "wb") as fh:
        fh.write(KSPACE_MAGIC)
        fh.write(struct.pack("<III", nx, ny, nc))
        fh.write(pack_complex_grid(arr))


def read_kspace(path) -> MultiCoilKSpace:
    """Read a HICUKSP1 file.

    Raises
    ------
    FileFormatError
        On a wrong magic, truncated header or payload, or trailing bytes.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8 or data[:8] != KSPACE_MAGIC:
        raise FileFormatError(f"{path}: not a HICUKSP1 file")
    if len(data) < 20:
        raise FileFormatError(f"{path}: truncated header")
    nx, ny, nc = struct.unpack("<III", data[8:20])
    _check_dims(nx, ny, nc)
    payload = data[20:]
    expected = nx * ny * nc * 8
    if len(payload) != expected:
        raise FileFormatError(
            f"{path}: payload holds {len(payload)} bytes, expected {expected}"
        )
    return MultiCoilKSpace(unpack_complex_grid(payload, nx, ny, nc))


def write_mask(path, mask) -> None:
    """Write a sampling mask in the HICUMSK1 format."""
    arr = as_mask_array(mask)
    nx, ny = arr.shape
    with open(path, "wb") as fh:
        fh.write(MASK_MAGIC)
        fh.write(struct.pack("<II", nx, ny))
        fh.write(np.ascontiguousarray(arr.T).astype(np.uint8).tobytes())


def read_mask(path) -> SamplingMask:
    """Read a HICUMSK1 file.

    Raises
    ------
    FileFormatError
        On a wrong magic, size mismatch, or any byte other than 0 or 1.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8 or data[:8] != MASK_MAGIC:
        raise FileFormatError(f"{path}: not a HICUMSK1 file")
    if len(data) < 16:
        raise FileFormatError(f"{path}: truncated header")
    nx, ny = struct.unpack("<II", data[8:16])
    _check_dims(nx, ny)
    payload = data[16:]
    if len(payload) != nx * ny:
        raise FileFormatError(
            f"{path}: payload holds {len(payload)} bytes, expected {nx * ny}"
        )
    flat = np.frombuffer(payload, dtype=np.uint8)
    if flat.max(initial=0) > 1:
        raise FileFormatError(f"{path}: mask bytes must be 0 or 1")
    return SamplingMask(flat.reshape(ny, nx).T.astype(bool))


def write_trace(path, records) -> None:
    """Write solver trace records as CSV.

    `records` is an iterable of objects with attributes matching the
    TRACE_HEADER columns (e.g. `hicu.solver.TraceRecord`).  A missing SNR
    (no reference supplied) is written as an empty field.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for rec in records:
            snr = getattr(rec, "snr_db", None)
            writer.writerow(
                [
                    f"{rec.wall_time_s:.6f}",
                    rec.outer,
                    rec.inner,
                    f"{rec.cost:.17g}",
                    f"{rec.eta:.17g}",
                    "" if snr is None else f"{snr:.10g}",
                ]
            )


def read_trace(path):
    """Read a trace CSV back into a list of dict rows (floats parsed)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRACE_HEADER:
            raise FileFormatError(f"{path}: unexpected trace header {header}")
        for row in reader:
            if len(row) != len(TRACE_HEADER):
                raise FileFormatError(f"{path}: malformed trace row {row}")
            rows.append(
                {
                    "wall_time_s": float(row[0]),
                    "outer": int(row[1]),
                    "inner": int(row[2]),
                    "cost": float(row[3]),
                    "eta": float(row[4]),
                    "snr_db": None if row[5] == "" else float(row[5]),
                }
            )
    return rows
