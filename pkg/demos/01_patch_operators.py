"""Sliding-neighborhood convolution operators on multi-coil k-space.

The reconstruction is built on one linear operator: collect every
kx-by-ky neighborhood of every coil whose output position falls inside
a rectangular region, and correlate each with a bank of filters.  This
script builds that operator on a small phantom, checks it against an
explicitly materialized matrix, and demonstrates the adjoint identity
that the solver's gradient relies on.

Run:  python3 demos/01_patch_operators.py
"""
import numpy as np

from hicu import (
    ConvolutionOperator,
    KernelSpec,
    Region,
    adjoint_scatter,
    apply_filters,
    full_region,
    make_phantom,
    materialize_convolution_matrix,
    PhantomSpec,
)

# ----------------------------------------------------------------------
# A small multi-coil k-space grid to play with.
# ----------------------------------------------------------------------
kspace, _ = make_phantom(PhantomSpec(nx=24, ny=24, nc=2, seed=0))
y = kspace.data
print(f"k-space grid: {y.shape[0]}x{y.shape[1]}, {y.shape[2]} coils")

# A 3x3 neighborhood across both coils -> 3*3*2 = 18 samples per patch.
kernel = KernelSpec(kx=3, ky=3, nc=2)
print(f"kernel: {kernel.kx}x{kernel.ky} over {kernel.nc} coils "
      f"= {kernel.n} samples per patch")

# The region is the rectangle of OUTPUT positions; its footprint is the
# larger rectangle of input samples any of those outputs touch.
region = full_region(24, 24, kernel)
print(f"region: origin ({region.x0}, {region.y0}), "
      f"{region.width}x{region.height} = {region.rows} patches")
print(f"footprint: {region.footprint(kernel)}")

# ----------------------------------------------------------------------
# Apply a random filter bank two ways: the FFT-free direct routine and
# an explicit dense matrix.  They agree to machine precision.
# ----------------------------------------------------------------------
rng = np.random.default_rng(7)
filters = rng.standard_normal((kernel.n, 5)) + 1j * rng.standard_normal((kernel.n, 5))

rows = apply_filters(y, filters, kernel, region)
dense = materialize_convolution_matrix(y, kernel, region)
direct_vs_dense = np.abs(rows - dense @ filters).max()
print(f"direct apply vs materialized matrix: max |diff| = {direct_vs_dense:.3e}")

# ----------------------------------------------------------------------
# The adjoint scatters weighted filter copies back onto the grid.  For
# any residual matrix R the inner products <scatter(R), Y> and
# <R, apply(Y)> must match — this is what makes the solver's gradient a
# true Wirtinger gradient.
# ----------------------------------------------------------------------
residuals = rng.standard_normal(rows.shape) + 1j * rng.standard_normal(rows.shape)
back = adjoint_scatter(residuals, filters, kernel, region, y.shape)
lhs = np.vdot(back, y)
rhs = np.vdot(residuals, rows)
print(f"adjoint identity: <A*R, Y> = {lhs:.6f}, <R, AY> = {rhs:.6f}, "
      f"|diff| = {abs(lhs - rhs):.3e}")

# ----------------------------------------------------------------------
# The same operator wrapped with a matmat/rmatmat interface, as consumed
# by the randomized SVD.  A smaller region keeps the matrix readable.
# ----------------------------------------------------------------------
small = Region(x0=5, y0=5, width=8, height=8)
op = ConvolutionOperator(y, kernel, small)
print(f"operator shape: {op.shape} "
      f"(= {small.rows} patches x {kernel.n} samples)")
probe = np.eye(kernel.n)[:, :3]
print(f"op.matmat(I[:, :3]) -> {op.matmat(probe).shape}, "
      f"op.rmatmat on that -> {op.rmatmat(op.matmat(probe)).shape}")
