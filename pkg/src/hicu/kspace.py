"""Structured convolution operators on multi-coil k-space.

The central object is the patch matrix H(Y): row (x, y) of H(Y) is the
flattened kx-by-ky-by-nc neighborhood of k-space centered at output
position (x, y) of a `Region`, in x-fastest/then-y/then-coil order and
the correlation convention (no kernel flip).  This module provides

* `materialize_convolution_matrix` — the dense (m, n) matrix, for small
  problems and for oracle tests;
* `apply_filters` / `adjoint_scatter` — matrix-free products H(Y) @ F and
  the adjoint scatter of residual rows back onto the k-space grid,
  computed with FFT convolutions at the cost of O(p) 2-D FFTs of the
  region footprint;
* `ConvolutionOperator` — the (m, n) linear map with cached FFTs of the
  fixed k-space, exposing matmat/rmatmat for subspace sketching;
* `cost_gradient` / `exact_line_search` — the objective ||H(Y) F||_F^2,
  its gradient restricted to unsampled locations, and the closed-form
  step size along a descent direction.

All heavy lifting happens in frequency domain: a valid correlation of the
footprint with each filter equals a circular convolution with the flipped
filter at footprint size, read off at the interior offsets.  Products are
chunked over filters to bound peak memory.
"""
from __future__ import annotations

import numpy as np

from .arrays import (
    FilterBank,
    KernelSpec,
    Region,
    as_kspace_array,
    as_mask_array,
    check_region,
)
from .errors import DegenerateDirectionWarning, DimensionError

import warnings

# Cap on the scratch memory used by one FFT batch (bytes).
_CHUNK_BYTES = 64 * 1024 * 1024


def _as_filter_array(filters, kernel: KernelSpec) -> np.ndarray:
    """Normalize `filters` to a complex (n, p) array matching `kernel`."""
    if isinstance(filters, FilterBank):
        if filters.kernel != kernel:
            raise DimensionError(
                f"filter bank kernel {filters.kernel} does not match {kernel}"
            )
        return filters.filters
    arr = np.asarray(filters, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] != kernel.n:
        raise DimensionError(
            f"filters must have shape ({kernel.n}, p), got {arr.shape}"
        )
    return arr


def _chunk_size(fw: int, fh: int, nc: int) -> int:
    """Number of filters whose footprint-sized FFT grids fit in the scratch cap."""
    per_filter = fw * fh * 16 * (nc + 2)
    return max(1, int(_CHUNK_BYTES // max(per_filter, 1)))


def _kernel_grid(filt: np.ndarray, kernel: KernelSpec) -> np.ndarray:
    """Reshape flattened filters (n, p) to grids (kx, ky, nc, p).

    Flattened index t = dx + kx*dy + kx*ky*c, so x varies fastest —
    exactly Fortran order over (kx, ky, nc).
    """
    p = filt.shape[1]
    return filt.reshape(kernel.kx, kernel.ky, kernel.nc, p, order="F")


def materialize_convolution_matrix(y, kernel: KernelSpec, region: Region) -> np.ndarray:
    """Dense patch matrix H(Y) of shape (m, n), m = region.rows, n = kernel.n.

    Row r = (x - x0) + width*(y - y0) holds the flattened neighborhood of
    output position (x, y); column t = dx + kx*dy + kx*ky*c is the sample
    at offset (dx - hx, dy - hy) in coil c relative to the center.

    Intended for small problems and as the reference for the matrix-free
    operators.
    """
    arr = as_kspace_array(y)
    nx, ny, nc = arr.shape
    if nc != kernel.nc:
        raise DimensionError(f"kernel expects {kernel.nc} coils, k-space has {nc}")
    check_region(region, kernel, nx, ny)
    sx, sy = region.footprint_slices(kernel)
    crop = arr[sx, sy, :]
    m = region.rows
    mat = np.empty((m, kernel.n), dtype=np.complex128)
    for c in range(kernel.nc):
        for dy in range(kernel.ky):
            for dx in range(kernel.kx):
                t = dx + kernel.kx * dy + kernel.kx * kernel.ky * c
                block = crop[dx : dx + region.width, dy : dy + region.height, c]
                mat[:, t] = block.T.reshape(m)
    return mat


def _apply_from_crop_fft(crop_fft: np.ndarray, filt: np.ndarray,
                         kernel: KernelSpec, region: Region) -> np.ndarray:
    """H(Y) @ F given the precomputed footprint FFT, chunked over filters."""
    fw, fh = crop_fft.shape[0], crop_fft.shape[1]
    p = filt.shape[1]
    m = region.rows
    out = np.empty((m, p), dtype=np.complex128)
    step = _chunk_size(fw, fh, kernel.nc)
    for lo in range(0, p, step):
        hi = min(lo + step, p)
        grid = _kernel_grid(filt[:, lo:hi], kernel)
        flipped = grid[::-1, ::-1, :, :]
        ker_fft = np.fft.fft2(flipped, s=(fw, fh), axes=(0, 1))
        prod = np.einsum("xyc,xycp->xyp", crop_fft, ker_fft)
        full = np.fft.ifft2(prod, axes=(0, 1))
        out3 = full[
            kernel.kx - 1 : kernel.kx - 1 + region.width,
            kernel.ky - 1 : kernel.ky - 1 + region.height,
            :,
        ]
        out[:, lo:hi] = out3.transpose(1, 0, 2).reshape(m, hi - lo)
    return out


def apply_filters(y, filters, kernel: KernelSpec, region: Region) -> np.ndarray:
    """Matrix-free H(Y) @ F: correlate every filter with the region footprint.

    Returns the (m, p) array of filter responses at the region's output
    positions, rows ordered x fastest.  Equivalent to
    ``materialize_convolution_matrix(y, kernel, region) @ F`` to machine
    precision.
    """
    arr = as_kspace_array(y)
    filt = _as_filter_array(filters, kernel)
    nx, ny, nc = arr.shape
    if nc != kernel.nc:
        raise DimensionError(f"kernel expects {kernel.nc} coils, k-space has {nc}")
    check_region(region, kernel, nx, ny)
    sx, sy = region.footprint_slices(kernel)
    crop = arr[sx, sy, :]
    crop_fft = np.fft.fft2(crop, axes=(0, 1))
    return _apply_from_crop_fft(crop_fft, filt, kernel, region)


def adjoint_scatter(residuals, filters, kernel: KernelSpec, region: Region,
                    shape) -> np.ndarray:
    """Adjoint of Y -> H(Y) @ F: scatter residual rows back onto k-space.

    Computes the (nx, ny, nc) array G with G = sum_p H^*(R[:, p] e_p^T)
    applied to filter p — i.e. the gradient of Re<R, H(Y) F> with respect
    to conj(Y).  Support is exactly the region footprint.
    """
    res = np.asarray(residuals, dtype=np.complex128)
    filt = _as_filter_array(filters, kernel)
    nx, ny, nc = shape
    if nc != kernel.nc:
        raise DimensionError(f"kernel expects {kernel.nc} coils, shape has {nc}")
    check_region(region, kernel, nx, ny)
    m = region.rows
    if res.ndim == 1:
        res = res[:, None]
    if res.shape != (m, filt.shape[1]):
        raise DimensionError(
            f"residuals must have shape ({m}, {filt.shape[1]}), got {res.shape}"
        )
    fx, fy, fw, fh = region.footprint(kernel)
    out = np.zeros((nx, ny, nc), dtype=np.complex128)
    # Rows are x fastest: row = ix + width*iy -> grid[ix, iy] via
    # reshape to (height, width) then transpose.
    res_grid = res.reshape(region.height, region.width, -1).transpose(1, 0, 2)
    p = res_grid.shape[2]
    step = _chunk_size(fw, fh, kernel.nc)
    acc = np.zeros((fw, fh, nc), dtype=np.complex128)
    for lo in range(0, p, step):
        hi = min(lo + step, p)
        grid = _kernel_grid(filt[:, lo:hi], kernel)
        res_fft = np.fft.fft2(res_grid[:, :, lo:hi], s=(fw, fh), axes=(0, 1))
        ker_fft = np.fft.fft2(np.conj(grid), s=(fw, fh), axes=(0, 1))
        prod = np.einsum("xyp,xycp->xyc", res_fft, ker_fft)
        acc += np.fft.ifft2(prod, axes=(0, 1))
    out[fx : fx + fw, fy : fy + fh, :] = acc
    return out


def _rmatmat_from_crop(crop_conj_fft: np.ndarray, res: np.ndarray,
                       kernel: KernelSpec, region: Region) -> np.ndarray:
    """H(Y)^H @ R given the FFT of the conjugated footprint."""
    fw, fh = crop_conj_fft.shape[0], crop_conj_fft.shape[1]
    m = region.rows
    if res.ndim == 1:
        res = res[:, None]
    if res.shape[0] != m:
        raise DimensionError(f"residuals must have {m} rows, got {res.shape[0]}")
    p = res.shape[1]
    res_grid = res.reshape(region.height, region.width, p).transpose(1, 0, 2)
    out = np.empty((kernel.n, p), dtype=np.complex128)
    step = _chunk_size(fw, fh, kernel.nc)
    for lo in range(0, p, step):
        hi = min(lo + step, p)
        flipped = res_grid[::-1, ::-1, lo:hi]
        res_fft = np.fft.fft2(flipped, s=(fw, fh), axes=(0, 1))
        prod = np.einsum("xyc,xyp->xycp", crop_conj_fft, res_fft)
        full = np.fft.ifft2(prod, axes=(0, 1))
        block = full[
            region.width - 1 : region.width - 1 + kernel.kx,
            region.height - 1 : region.height - 1 + kernel.ky,
            :,
            :,
        ]
        out[:, lo:hi] = block.reshape(kernel.n, hi - lo, order="F")
    return out


class ConvolutionOperator:
    """The (m, n) patch-matrix linear map for a fixed k-space.

    Precomputes the footprint FFTs once so repeated matmat/rmatmat calls —
    the access pattern of randomized subspace sketching — cost only the
    filter-side FFTs.
    """

    def __init__(self, y, kernel: KernelSpec, region: Region):
        arr = as_kspace_array(y)
        nx, ny, nc = arr.shape
        if nc != kernel.nc:
            raise DimensionError(f"kernel expects {kernel.nc} coils, k-space has {nc}")
        check_region(region, kernel, nx, ny)
        self.kernel = kernel
        self.region = region
        self.grid_shape = (nx, ny, nc)
        sx, sy = region.footprint_slices(kernel)
        crop = arr[sx, sy, :]
        self._crop_fft = np.fft.fft2(crop, axes=(0, 1))
        self._crop_conj_fft = np.fft.fft2(np.conj(crop), axes=(0, 1))

    @property
    def shape(self):
        return (self.region.rows, self.kernel.n)

    def matmat(self, filters) -> np.ndarray:
        """(m, n) @ (n, p) -> (m, p)."""
        filt = _as_filter_array(filters, self.kernel)
        return _apply_from_crop_fft(self._crop_fft, filt, self.kernel, self.region)

    def rmatmat(self, residuals) -> np.ndarray:
        """(m, n)^H @ (m, p) -> (n, p)."""
        res = np.asarray(residuals, dtype=np.complex128)
        return _rmatmat_from_crop(self._crop_conj_fft, res, self.kernel, self.region)

    def matvec(self, filt) -> np.ndarray:
        return self.matmat(filt)[:, 0]

    def rmatvec(self, res) -> np.ndarray:
        return self.rmatmat(np.asarray(res, dtype=np.complex128)[:, None])[:, 0]


def cost_gradient(w, filters, kernel: KernelSpec, region: Region, mask):
    """Objective ||H(W) F||_F^2 and its gradient over unsampled locations.

    The gradient is taken with respect to conj(W) (so a step W <- W - eta*G
    descends the real-valued objective), doubled per the real chain rule,
    and zeroed at sampled locations: measured data is a hard constraint,
    so only the complement of the mask moves.

    Returns
    -------
    (gradient, cost) : (ndarray (nx, ny, nc), float)
    """
    arr = as_kspace_array(w)
    m_arr = as_mask_array(mask)
    if m_arr.shape != arr.shape[:2]:
        raise DimensionError(
            f"mask shape {m_arr.shape} does not match k-space {arr.shape[:2]}"
        )
    rows = apply_filters(arr, filters, kernel, region)
    cost = float(np.vdot(rows, rows).real)
    grad = 2.0 * adjoint_scatter(rows, filters, kernel, region, arr.shape)
    grad[m_arr] = 0.0
    return grad, cost


def _line_search_from_products(rows_w: np.ndarray, rows_g: np.ndarray) -> float:
    """Closed-form minimizer of ||A - eta*B||_F^2 with A = H(W)F, B = H(G)F."""
    denom = float(np.vdot(rows_g, rows_g).real)
    if denom <= 0.0 or not np.isfinite(denom):
        warnings.warn(
            "degenerate search direction (zero filtered energy); taking no step",
            DegenerateDirectionWarning,
            stacklevel=3,
        )
        return 0.0
    numer = float(np.vdot(rows_w, rows_g).real)
    return numer / denom


def exact_line_search(w, grad, filters, kernel: KernelSpec, region: Region) -> float:
    """Optimal step size along -grad for the quadratic objective.

    Because H is linear in its argument, f(eta) = ||H(W - eta*G) F||_F^2
    is an exact quadratic in eta; the minimizer is
    Re<H(W)F, H(G)F> / ||H(G)F||_F^2.  A degenerate direction (zero
    denominator) warns and returns 0.0.
    """
    rows_w = apply_filters(w, filters, kernel, region)
    rows_g = apply_filters(grad, filters, kernel, region)
    return _line_search_from_products(rows_w, rows_g)
