"""Subspace estimation and compression for structured low-rank completion.

Three pieces:

* `rsvd_right_vectors` — randomized range finding with power iterations,
  returning the leading right singular vectors of an implicit operator.
* `householder_complement` — orthonormal basis of the orthogonal
  complement (the approximate nullspace used as filters).
* `jl_compress` — random projection of a wide filter bank down to p
  columns, preserving the cost in expectation.
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigError, DegenerateInputError, DimensionError
from .rng import STREAM_JL, STREAM_RSVD, RngSeed

# Orthonormality slack allowed on stored basis columns.
_ORTHO_TOL = 1e-8


def _check_orthonormal(v: np.ndarray, what: str) -> None:
    if v.shape[1] == 0:
        return
    gram = v.conj().T @ v
    dev = np.abs(gram - np.eye(v.shape[1])).max()
    if not dev <= _ORTHO_TOL:
        raise ValueError(
            f"{what} columns are not orthonormal (max Gram deviation {dev:.3e})"
        )


class SignalSubspace:
    """Leading right singular vectors of a convolution matrix.

    Attributes
    ----------
    vectors : ndarray (n, r)
        Orthonormal columns.
    singular_values : ndarray (r,)
        Matching singular value estimates, non-increasing.
    """

    def __init__(self, vectors, singular_values):
        v = np.asarray(vectors, dtype=np.complex128)
        s = np.asarray(singular_values, dtype=np.float64)
        if v.ndim != 2:
            raise DimensionError(f"vectors must be 2-D, got shape {v.shape}")
        if s.shape != (v.shape[1],):
            raise DimensionError(
                f"need one singular value per vector, got {s.shape} for {v.shape}"
            )
        _check_orthonormal(v, "signal subspace")
        if s.size and (np.any(s < 0) or np.any(np.diff(s) > _ORTHO_TOL * max(s[0], 1.0))):
            raise ValueError("singular values must be non-negative and non-increasing")
        self.vectors = v
        self.singular_values = s

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]

    def __repr__(self):
        return f"SignalSubspace(n={self.n}, rank={self.rank})"


class NullspaceBasis:
    """Orthonormal basis of the complement of a signal subspace.

    Attributes
    ----------
    vectors : ndarray (n, q)
        Orthonormal columns orthogonal to the signal subspace; q = n - r.
    """

    def __init__(self, vectors):
        v = np.asarray(vectors, dtype=np.complex128)
        if v.ndim != 2:
            raise DimensionError(f"vectors must be 2-D, got shape {v.shape}")
        _check_orthonormal(v, "nullspace basis")
        self.vectors = v

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def q(self) -> int:
        return self.vectors.shape[1]

    def __repr__(self):
        return f"NullspaceBasis(n={self.n}, q={self.q})"


def _generator(seed, stream_id) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, RngSeed):
        return seed.stream(stream_id)
    return RngSeed(int(seed)).stream(stream_id)


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def rsvd_right_vectors(op, rank: int, *, oversample: int = 10,
                       power_iters: int = 2, seed=0) -> SignalSubspace:
    """Estimate the top right singular vectors of an implicit operator.

    Parameters
    ----------
    op : object with ``shape`` (m, n), ``matmat`` and ``rmatmat``
        The operator, e.g. a `ConvolutionOperator`.  ``matmat`` maps
        (n, k) -> (m, k) and ``rmatmat`` applies the conjugate transpose.
    rank : int
        Number of right singular vectors to return, 1 <= rank <= min(m, n).
    oversample : int
        Extra sketch columns beyond `rank` (clipped to the operator size).
    power_iters : int
        Power iterations; each re-orthonormalizes with a QR factorization,
        sharpening the sketch when the spectrum decays slowly.
    seed : RngSeed, int or numpy Generator
        Source of the Gaussian test matrix.

    Returns
    -------
    SignalSubspace
        Orthonormal (n, rank) vectors and their singular value estimates.
    """
    m, n = op.shape
    if not 1 <= rank <= min(m, n):
        raise ConfigError(
            f"rank must be in [1, {min(m, n)}] for a {m}x{n} operator, got {rank}"
        )
    if oversample < 0:
        raise ConfigError(f"oversample must be non-negative, got {oversample}")
    if power_iters < 0:
        raise ConfigError(f"power_iters must be non-negative, got {power_iters}")
    rng = _generator(seed, STREAM_RSVD)
    width = min(rank + oversample, m, n)
    probes = _complex_normal(rng, (m, width))
    sketch, _ = np.linalg.qr(op.rmatmat(probes))
    for _ in range(power_iters):
        lifted, _ = np.linalg.qr(op.matmat(sketch))
        sketch, _ = np.linalg.qr(op.rmatmat(lifted))
    small = op.matmat(sketch)
    _, values, vh = np.linalg.svd(small, full_matrices=False)
    vectors = sketch @ vh.conj().T[:, :rank]
    return SignalSubspace(vectors, values[:rank])


def householder_complement(subspace) -> NullspaceBasis:
    """Orthonormal basis of the orthogonal complement of a subspace.

    The complement is read off a full QR factorization of the basis
    matrix (a product of one Householder reflection per column): columns
    r..n of the Q factor are orthonormal and annihilate the input.

    Parameters
    ----------
    subspace : SignalSubspace or ndarray (n, r)
        Must have (numerically) linearly independent columns.

    Returns
    -------
    NullspaceBasis
        (n, n - r) basis; the identity when r = 0.

    Raises
    ------
    DegenerateInputError
        If the input columns are numerically dependent.
    """
    v = subspace.vectors if isinstance(subspace, SignalSubspace) else subspace
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 2:
        raise DimensionError(f"subspace must be 2-D, got shape {v.shape}")
    n, r = v.shape
    if r > n:
        raise DimensionError(f"cannot have {r} independent columns in dimension {n}")
    if r == 0:
        return NullspaceBasis(np.eye(n, dtype=np.complex128))
    q_full, r_factor = np.linalg.qr(v, mode="complete")
    diag = np.abs(np.diag(r_factor[:r, :r]))
    scale = max(np.abs(v).max(), 1.0)
    if np.any(diag <= n * np.finfo(np.float64).eps * scale):
        raise DegenerateInputError(
            "subspace columns are numerically dependent; complement is not "
            "well defined at the requested rank"
        )
    return NullspaceBasis(q_full[:, r:])


def jl_compress(basis, p: int, *, seed=0, probe: str = "gaussian") -> np.ndarray:
    """Compress a filter bank to p columns by random projection.

    With Q of shape (n, q) and P a q-by-p matrix of iid standard normal
    entries, returns ``Q @ P / sqrt(p)`` — an unbiased sketch in the sense
    that E||H Q P / sqrt(p)||_F^2 = ||H Q||_F^2.

    `probe="identity"` is a deterministic test hook: P is the first p
    columns of the identity and no scaling is applied, so the result is
    just the leading columns of Q.

    Parameters
    ----------
    basis : NullspaceBasis or ndarray (n, q)
    p : int
        Number of output columns, 1 <= p <= q.
    seed : RngSeed, int or numpy Generator
    probe : {"gaussian", "identity"}
    """
    q_mat = basis.vectors if isinstance(basis, NullspaceBasis) else np.asarray(basis, dtype=np.complex128)
    if q_mat.ndim != 2:
        raise DimensionError(f"basis must be 2-D, got shape {q_mat.shape}")
    q = q_mat.shape[1]
    if not 1 <= p <= q:
        raise ConfigError(f"p must be in [1, {q}] for a {q}-column basis, got {p}")
    if probe == "identity":
        return q_mat[:, :p].copy()
    if probe != "gaussian":
        raise ValueError(f"unknown probe kind {probe!r}")
    rng = _generator(seed, STREAM_JL)
    proj = rng.standard_normal((q, p))
    return (q_mat @ proj) / np.sqrt(p)
