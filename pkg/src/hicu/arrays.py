"""Core value types: k-space arrays, masks, kernel geometry, regions, filters.

Conventions used throughout the package:

* Multi-coil k-space is a complex array of shape ``(nx, ny, nc)`` — readout
  (x) first, phase encode (y) second, coil last.
* Flattened patch entries and region positions are ordered x-fastest, then
  y, then coil: element ``t = dx + kx*dy + kx*ky*c``, row ``ix + width*iy``.
* Neighborhood extraction uses the correlation convention (no kernel flip).
* A `Region` is a rectangle of valid-convolution OUTPUT positions: every
  position is the center of one kernel-sized neighborhood that must lie
  entirely inside the grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


class MultiCoilKSpace:
    """Validated multi-coil Cartesian k-space.

    Parameters
    ----------
    data : ndarray
        Complex array of shape (nx, ny, nc).  Any complex (or real) dtype
        is accepted and converted to complex128.  All entries must be
        finite.

    Attributes
    ----------
    data : ndarray, complex128, shape (nx, ny, nc)
    nx, ny, nc : int
    """

    def __init__(self, data):
        arr = np.asarray(data)
        if arr.ndim != 3:
            raise DimensionError(
                f"k-space must be 3-D (nx, ny, nc), got shape {arr.shape}"
            )
        if any(s < 1 for s in arr.shape):
            raise DimensionError(f"k-space axes must be non-empty, got {arr.shape}")
        arr = arr.astype(np.complex128, copy=False)
        if not np.all(np.isfinite(arr)):
            raise ValueError("k-space contains non-finite values")
        self.data = arr

    @property
    def nx(self) -> int:
        return self.data.shape[0]

    @property
    def ny(self) -> int:
        return self.data.shape[1]

    @property
    def nc(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self):
        return self.data.shape

    def copy(self) -> "MultiCoilKSpace":
        return MultiCoilKSpace(self.data.copy())

    def __repr__(self):
        return f"MultiCoilKSpace(nx={self.nx}, ny={self.ny}, nc={self.nc})"


class SamplingMask:
    """Boolean k-space sampling pattern shared by all coils.

    Parameters
    ----------
    mask : ndarray
        Array of shape (nx, ny); nonzero entries mark sampled locations.
        At least one location must be sampled.
    """

    def __init__(self, mask):
        arr = np.asarray(mask)
        if arr.ndim != 2:
            raise DimensionError(f"mask must be 2-D (nx, ny), got shape {arr.shape}")
        arr = arr.astype(bool)
        if not arr.any():
            raise ValueError("mask has no sampled locations")
        self.mask = arr

    @property
    def nx(self) -> int:
        return self.mask.shape[0]

    @property
    def ny(self) -> int:
        return self.mask.shape[1]

    @property
    def shape(self):
        return self.mask.shape

    def fraction_sampled(self) -> float:
        return float(self.mask.mean())

    def __repr__(self):
        return (
            f"SamplingMask(nx={self.nx}, ny={self.ny}, "
            f"fraction={self.fraction_sampled():.4f})"
        )


@dataclass(frozen=True)
class KernelSpec:
    """Size of the sliding k-space neighborhood.

    kx and ky must be odd so the neighborhood has a well-defined center.
    The flattened patch length is n = kx * ky * nc and must be at least 2
    (a single-sample patch has no nullspace to exploit).
    """

    kx: int
    ky: int
    nc: int

    def __post_init__(self):
        for name in ("kx", "ky", "nc"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise DimensionError(f"{name} must be a positive integer, got {v!r}")
        if self.kx % 2 == 0 or self.ky % 2 == 0:
            raise DimensionError(
                f"kernel sides must be odd, got {self.kx}x{self.ky}"
            )
        if self.n < 2:
            raise DimensionError(
                f"patch length kx*ky*nc = {self.n} must be at least 2"
            )

    @property
    def n(self) -> int:
        """Flattened patch length kx * ky * nc."""
        return self.kx * self.ky * self.nc

    @property
    def hx(self) -> int:
        """Half width along x."""
        return (self.kx - 1) // 2

    @property
    def hy(self) -> int:
        """Half width along y."""
        return (self.ky - 1) // 2


@dataclass(frozen=True)
class Region:
    """Rectangle of valid-convolution output positions.

    Position (x, y) with x0 <= x < x0 + width, y0 <= y < y0 + height is
    the center of one kernel neighborhood; the neighborhoods of all
    positions must fit inside the grid (checked against a kernel by
    `check_region`).  Rows of the convolution matrix enumerate positions
    x-fastest: row = (x - x0) + width * (y - y0); m = width * height.
    """

    x0: int
    y0: int
    width: int
    height: int

    def __post_init__(self):
        for name in ("x0", "y0"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise DimensionError(f"{name} must be a non-negative integer, got {v!r}")
        for name in ("width", "height"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise DimensionError(f"{name} must be a positive integer, got {v!r}")

    @property
    def rows(self) -> int:
        """Number of output positions, m = width * height."""
        return self.width * self.height

    def footprint(self, kernel: KernelSpec):
        """(x_start, y_start, f_width, f_height) of the k-space samples
        touched by this region's neighborhoods."""
        return (
            self.x0 - kernel.hx,
            self.y0 - kernel.hy,
            self.width + kernel.kx - 1,
            self.height + kernel.ky - 1,
        )

    def footprint_slices(self, kernel: KernelSpec):
        """Index slices selecting the footprint from an (nx, ny, ...) array."""
        fx, fy, fw, fh = self.footprint(kernel)
        return slice(fx, fx + fw), slice(fy, fy + fh)

    def contains(self, other: "Region") -> bool:
        """Whether `other` lies entirely inside this region."""
        return (
            self.x0 <= other.x0
            and self.y0 <= other.y0
            and other.x0 + other.width <= self.x0 + self.width
            and other.y0 + other.height <= self.y0 + self.height
        )


def check_region(region: Region, kernel: KernelSpec, nx: int, ny: int) -> None:
    """Validate that every neighborhood of `region` fits in an nx-by-ny
    grid (the kernel never overhangs the array).

    Raises
    ------
    DimensionError
        If any neighborhood would extend outside the grid.
    """
    fx, fy, fw, fh = region.footprint(kernel)
    if fx < 0 or fy < 0 or fx + fw > nx or fy + fh > ny:
        raise DimensionError(
            f"region {region} with a {kernel.kx}x{kernel.ky} kernel needs "
            f"samples outside the ({nx}, {ny}) grid"
        )


def full_region(nx: int, ny: int, kernel: KernelSpec) -> Region:
    """All valid output positions of an nx-by-ny grid for `kernel`."""
    if nx < kernel.kx or ny < kernel.ky:
        raise DimensionError(
            f"grid ({nx}, {ny}) is smaller than the kernel "
            f"{kernel.kx}x{kernel.ky}"
        )
    return Region(kernel.hx, kernel.hy, nx - kernel.kx + 1, ny - kernel.ky + 1)


class FilterBank:
    """A stack of p flattened kernel-domain filters, shape (n, p), 1 <= p <= n.

    Columns live in the flattened patch ordering of `KernelSpec`
    (x fastest, then y, then coil).
    """

    def __init__(self, filters, kernel: KernelSpec):
        arr = np.asarray(filters)
        if arr.ndim != 2:
            raise DimensionError(f"filters must be 2-D (n, p), got shape {arr.shape}")
        if arr.shape[0] != kernel.n:
            raise DimensionError(
                f"filter length {arr.shape[0]} does not match kernel patch "
                f"length {kernel.n}"
            )
        if not 1 <= arr.shape[1] <= kernel.n:
            raise DimensionError(
                f"filter count must be in [1, {kernel.n}], got {arr.shape[1]}"
            )
        self.filters = arr.astype(np.complex128, copy=False)
        self.kernel = kernel

    @property
    def n(self) -> int:
        return self.filters.shape[0]

    @property
    def p(self) -> int:
        return self.filters.shape[1]

    def __repr__(self):
        return f"FilterBank(n={self.n}, p={self.p})"


def as_kspace_array(y) -> np.ndarray:
    """Accept a MultiCoilKSpace or bare ndarray; return the (nx, ny, nc) array."""
    if isinstance(y, MultiCoilKSpace):
        return y.data
    arr = np.asarray(y)
    if arr.ndim != 3:
        raise DimensionError(
            f"k-space must be 3-D (nx, ny, nc), got shape {arr.shape}"
        )
    return arr.astype(np.complex128, copy=False)


def as_mask_array(m) -> np.ndarray:
    """Accept a SamplingMask or bare ndarray; return the boolean (nx, ny) array."""
    if isinstance(m, SamplingMask):
        return m.mask
    arr = np.asarray(m)
    if arr.ndim != 2:
        raise DimensionError(f"mask must be 2-D (nx, ny), got shape {arr.shape}")
    return arr.astype(bool)
