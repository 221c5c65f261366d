"""Byte formats shared with the reconstruction CLI.

Both containers use the same layout: an 8-byte ASCII magic, little-
endian u32 dimensions, then the complex payload as float32 (re, im)
pairs with x fastest, then y, then coil.

* ``HICUKSP1`` — k-space or coil-image grids on disk (nx, ny, nc).
* ``HICUDNZ1`` — one denoise request/response frame on a pipe; the
  payload is coil IMAGES of shape (nx, ny, nc).

Implemented here from the published format description; this package
deliberately does not import the reconstruction library.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

KSPACE_MAGIC = b"HICUKSP1"
FRAME_MAGIC = b"HICUDNZ1"

_HEADER = struct.Struct("<III")
_MAX_DIM = 2**20


class FormatError(Exception):
    """Malformed container or frame bytes."""


def _check_dims(nx: int, ny: int, nc: int) -> None:
    for name, value in (("nx", nx), ("ny", ny), ("nc", nc)):
        if not 1 <= value <= _MAX_DIM:
            raise FormatError(f"unreasonable dimension {name} = {value}")


def _unpack_grid(payload: bytes, nx: int, ny: int, nc: int) -> np.ndarray:
    expected = nx * ny * nc * 8
    if len(payload) != expected:
        raise FormatError(
            f"payload holds {len(payload)} bytes, expected {expected}"
        )
    flat = np.frombuffer(payload, dtype="<c8")
    return flat.reshape(nc, ny, nx).transpose(2, 1, 0).astype(np.complex128)


def _pack_grid(grid: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(
        np.asarray(grid, dtype=np.complex128).transpose(2, 1, 0),
        dtype="<c8",
    )
    return arr.tobytes()


def read_kspace(path) -> np.ndarray:
    """Read a HICUKSP1 file into a complex128 (nx, ny, nc) array."""
    blob = Path(path).read_bytes()
    if len(blob) < 20 or blob[:8] != KSPACE_MAGIC:
        raise FormatError(f"{path}: not a HICUKSP1 file")
    nx, ny, nc = _HEADER.unpack(blob[8:20])
    _check_dims(nx, ny, nc)
    return _unpack_grid(blob[20:], nx, ny, nc)


def write_kspace(path, grid: np.ndarray) -> None:
    """Write a complex (nx, ny, nc) array as a HICUKSP1 file."""
    arr = np.asarray(grid)
    if arr.ndim != 3:
        raise FormatError(f"grid must be 3-D, got shape {arr.shape}")
    nx, ny, nc = arr.shape
    Path(path).write_bytes(
        KSPACE_MAGIC + _HEADER.pack(nx, ny, nc) + _pack_grid(arr)
    )


def pack_frame(images: np.ndarray) -> bytes:
    """Serialize coil images as one HICUDNZ1 frame."""
    arr = np.asarray(images)
    if arr.ndim != 3:
        raise FormatError(f"frame payload must be 3-D, got shape {arr.shape}")
    nx, ny, nc = arr.shape
    return FRAME_MAGIC + _HEADER.pack(nx, ny, nc) + _pack_grid(arr)


def unpack_frame(blob: bytes) -> np.ndarray:
    """Parse one complete HICUDNZ1 frame into a complex128 (nx, ny, nc) array."""
    if len(blob) < 20 or blob[:8] != FRAME_MAGIC:
        raise FormatError("malformed frame header")
    nx, ny, nc = _HEADER.unpack(blob[8:20])
    _check_dims(nx, ny, nc)
    return _unpack_grid(blob[20:], nx, ny, nc)


def read_frame_payload(header: bytes, read_exact) -> np.ndarray:
    """Parse a frame given its 20-byte header and a byte-reading callback.

    ``read_exact(n)`` must return exactly n bytes or raise; used by the
    server loop so a frame is only ever consumed whole.
    """
    if len(header) != 20 or header[:8] != FRAME_MAGIC:
        raise FormatError("malformed frame header")
    nx, ny, nc = _HEADER.unpack(header[8:20])
    _check_dims(nx, ny, nc)
    return _unpack_grid(read_exact(nx * ny * nc * 8), nx, ny, nc)


def kspace_to_image(kspace: np.ndarray) -> np.ndarray:
    """Centered orthonormal inverse FFT over the first two axes.

    The reconstruction side's published convention:
    fftshift(ifft2(ifftshift(k), norm="ortho")).
    """
    shifted = np.fft.ifftshift(kspace, axes=(0, 1))
    img = np.fft.ifft2(shifted, axes=(0, 1), norm="ortho")
    return np.fft.fftshift(img, axes=(0, 1))
