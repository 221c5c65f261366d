"""Straight-line reference implementations used as test oracles.

Everything here favors clarity over speed: dense patch extraction by
indexing, exact SVDs, no randomized sketching, no filter compression.
The package under test must agree with these on small problems.

Regions are rectangles of output positions (x0, y0, width, height): each
position (x, y) inside the rectangle is the center of one kernel-sized
neighborhood, and the neighborhoods must stay inside the grid.
"""
import numpy as np


class DenseOp:
    """Explicit-matrix stand-in for anything with matmat/rmatmat."""

    def __init__(self, a):
        self.a = np.asarray(a, dtype=complex)
        self.shape = self.a.shape

    def matmat(self, x):
        return self.a @ x

    def rmatmat(self, x):
        return self.a.conj().T @ x


def dense_patch_matrix(y, x0, y0, width, height, kx, ky):
    """Rows = flattened neighborhoods (x fastest, then y, then coil),
    one per output position of the region, positions x fastest."""
    nc = y.shape[2]
    hx, hy = (kx - 1) // 2, (ky - 1) // 2
    n = kx * ky * nc
    rows = np.empty((width * height, n), dtype=complex)
    for iy in range(height):
        for ix in range(width):
            cx, cy = x0 + ix, y0 + iy
            patch = y[cx - hx : cx + hx + 1, cy - hy : cy + hy + 1, :]
            # element t = dx + kx*dy + kx*ky*c
            rows[ix + width * iy, :] = patch.reshape(-1, order="F")
    return rows


def dense_scatter(residuals, y_shape, x0, y0, width, height, kx, ky, filters):
    """Adjoint of y -> patch_matrix(y) @ filters, by explicit accumulation."""
    nc = y_shape[2]
    hx, hy = (kx - 1) // 2, (ky - 1) // 2
    contrib = residuals @ filters.conj().T  # (m, n)
    out = np.zeros(y_shape, dtype=complex)
    for iy in range(height):
        for ix in range(width):
            cx, cy = x0 + ix, y0 + iy
            row = contrib[ix + width * iy].reshape(kx, ky, nc, order="F")
            out[cx - hx : cx + hx + 1, cy - hy : cy + hy + 1, :] += row
    return out


def centered_region(nx, ny, fraction, kx, ky):
    """Centered ceil(fraction*n) block of output positions, shrunk to the
    valid-convolution interior."""
    from math import ceil

    hx, hy = (kx - 1) // 2, (ky - 1) // 2
    want_w = min(ceil(fraction * nx), nx)
    want_h = min(ceil(fraction * ny), ny)
    x0 = (nx - want_w) // 2
    y0 = (ny - want_h) // 2
    lo_x, hi_x = max(x0, hx), min(x0 + want_w, nx - hx)
    lo_y, hi_y = max(y0, hy), min(y0 + want_h, ny - hy)
    width, height = hi_x - lo_x, hi_y - lo_y
    assert width >= kx and height >= ky
    return lo_x, lo_y, width, height


def reference_solve(measured, mask, rank, stages, kernel=(3, 3)):
    """Plain alternating minimization: exact SVD each outer iteration,
    the full nullspace as filters (no compression), exact line search,
    hard data consistency.

    stages: list of (fraction, g_steps, outer_iters).
    """
    kx, ky = kernel
    z = np.where(mask[:, :, None], measured, 0).astype(complex)
    y = z.copy()
    nx, ny, _ = y.shape
    for fraction, g_steps, outer_iters in stages:
        x0, y0, width, height = centered_region(nx, ny, fraction, kx, ky)
        for _ in range(outer_iters):
            h = dense_patch_matrix(y, x0, y0, width, height, kx, ky)
            _, _, vh = np.linalg.svd(h, full_matrices=False)
            q = vh[rank:].conj().T
            w = y
            for _ in range(g_steps):
                a = dense_patch_matrix(w, x0, y0, width, height, kx, ky) @ q
                g = 2.0 * dense_scatter(
                    a, w.shape, x0, y0, width, height, kx, ky, q
                )
                g[mask] = 0.0
                b = dense_patch_matrix(g, x0, y0, width, height, kx, ky) @ q
                denom = np.vdot(b, b).real
                eta = 0.0 if denom == 0.0 else np.vdot(b, a).real / denom
                w = w - eta * g
                w = np.where(mask[:, :, None], z, w)
            y = w
    return y
