"""Signal subspace, nullspace, and filter compression.

The annihilation cost needs an orthonormal basis of the patch matrix's
nullspace.  Getting it has three steps, each demonstrated here on a
phantom's fully sampled patch matrix:

1. a randomized SVD finds the leading right singular vectors (the
   signal subspace) without ever forming the dense matrix;
2. a Householder QR of those vectors yields an exactly orthonormal
   complement (the annihilating filters);
3. a random projection compresses the possibly huge filter bank down to
   a few mixed filters while preserving the cost in expectation.

Run:  python3 demos/02_signal_subspace.py
"""
import numpy as np

from hicu import (
    ConvolutionOperator,
    KernelSpec,
    PhantomSpec,
    full_region,
    householder_complement,
    jl_compress,
    make_phantom,
    materialize_convolution_matrix,
    rsvd_right_vectors,
)

kspace, _ = make_phantom(PhantomSpec(nx=64, ny=64, nc=4, seed=0))
kernel = KernelSpec(3, 3, 4)
region = full_region(64, 64, kernel)
op = ConvolutionOperator(kspace.data, kernel, region)
print(f"patch matrix: {op.shape[0]} patches x {op.shape[1]} samples")

# ----------------------------------------------------------------------
# 1. Randomized SVD.  The phantom's patch matrix has rapidly decaying
# spectrum — that decay is the entire reason k-space completion works.
# ----------------------------------------------------------------------
rank = 12
subspace = rsvd_right_vectors(op, rank, oversample=10, power_iters=2, seed=0)
dense = materialize_convolution_matrix(kspace.data, kernel, region)
s_full = np.linalg.svd(dense, compute_uv=False)
print(f"spectrum decay: s1 = {s_full[0]:.1f}, s{rank} = {s_full[rank-1]:.2f}, "
      f"s{rank+1}/s1 = {s_full[rank]/s_full[0]:.4f}")
rel = np.abs(subspace.singular_values - s_full[:rank]) / s_full[:rank]
print(f"randomized vs dense singular values: max rel err = {rel.max():.2e}")

# ----------------------------------------------------------------------
# 2. Householder complement.  Stacking [V Q] gives a unitary matrix:
# Q is orthonormal and annihilates the signal subspace exactly.
# ----------------------------------------------------------------------
basis = householder_complement(subspace.vectors)
q = basis.vectors
print(f"nullspace basis: {q.shape[0]} x {q.shape[1]} "
      f"(n - r = {kernel.n} - {rank})")
print(f"  ||Q*Q - I||_max  = {np.abs(q.conj().T @ q - np.eye(q.shape[1])).max():.2e}")
print(f"  ||Q*V||_max      = {np.abs(q.conj().T @ subspace.vectors).max():.2e}")

# ----------------------------------------------------------------------
# 3. Compression.  A Gaussian sketch with p columns approximates the
# annihilation cost ||A Q||^2 using only p filter responses; the
# scaling by 1/sqrt(p) makes the approximation unbiased.
# ----------------------------------------------------------------------
full_cost = np.linalg.norm(dense @ q) ** 2
for p in (4, 8, 16):
    sketches = [
        np.linalg.norm(dense @ jl_compress(basis, p, seed=s)) ** 2
        for s in range(30)
    ]
    mean = np.mean(sketches)
    print(f"p = {p:2d}: full cost {full_cost:10.3f}, "
          f"sketched mean over 30 seeds {mean:10.3f} "
          f"(rel dev {abs(mean - full_cost)/full_cost:.3f})")

# The deterministic identity probe simply keeps the first p filters
# (unscaled) — handy when exact reproducibility matters more than
# isotropy, e.g. when demonstrating monotone descent.
ident = jl_compress(basis, 8, seed=0, probe="identity")
print(f"identity probe == leading columns: {np.array_equal(ident, q[:, :8])}")
