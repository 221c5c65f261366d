"""Synthetic multi-coil test data.

An ellipse phantom (the classic head arrangement by default) is painted
on a [-1, 1]^2 grid, modulated by smooth complex coil sensitivities
(Gaussian bumps on a ring just outside the object, each with its own
constant and linear phase), transformed to k-space, and optionally
corrupted with white Gaussian noise at a prescribed SNR.

Everything is deterministic given the seed: geometry never consumes
randomness, so the noiseless k-space of a spec is reproducible by
rebuilding it with ``noise_db=None``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arrays import MultiCoilKSpace
from .errors import ConfigError
from .fourier import image_to_kspace
from .rng import STREAM_PHANTOM, RngSeed


@dataclass(frozen=True)
class Ellipse:
    """One ellipse: additive amplitude, center, semi-axes, rotation (rad)."""

    amplitude: float
    cx: float
    cy: float
    a: float
    b: float
    theta: float = 0.0


def _head_ellipses():
    # Classic head phantom arrangement (amplitudes in the high-contrast
    # variant); coordinates live in [-1, 1].
    deg = np.pi / 180.0
    rows = [
        (1.00, 0.00, 0.0000, 0.6900, 0.9200, 0.0),
        (-0.80, 0.00, -0.0184, 0.6624, 0.8740, 0.0),
        (-0.20, 0.22, 0.0000, 0.1100, 0.3100, -18.0),
        (-0.20, -0.22, 0.0000, 0.1600, 0.4100, 18.0),
        (0.10, 0.00, 0.3500, 0.2100, 0.2500, 0.0),
        (0.10, 0.00, 0.1000, 0.0460, 0.0460, 0.0),
        (0.10, 0.00, -0.1000, 0.0460, 0.0460, 0.0),
        (0.10, -0.08, -0.6050, 0.0460, 0.0230, 0.0),
        (0.10, 0.00, -0.6060, 0.0230, 0.0230, 0.0),
        (0.10, 0.06, -0.6050, 0.0230, 0.0460, 0.0),
    ]
    return tuple(
        Ellipse(amp, cx, cy, a, b, phi * deg) for amp, cx, cy, a, b, phi in rows
    )


DEFAULT_ELLIPSES = _head_ellipses()

# Coil geometry: bump centers sit on this ring radius, bump width below.
_COIL_RING_RADIUS = 1.05
_COIL_WIDTH = 0.75


@dataclass(frozen=True)
class PhantomSpec:
    """Recipe for a synthetic multi-coil acquisition.

    Parameters
    ----------
    nx, ny : int
        Grid size.
    nc : int
        Number of coils.
    noise_db : float or None
        k-space SNR of the additive white Gaussian noise; None for
        noiseless data.
    seed : int
        Drives the noise draw (and coil-angle jitter when enabled).
    jitter : float
        Optional random perturbation of the coil ring angles, as a
        fraction of the coil spacing; 0 keeps coils exactly equispaced.
    ellipses : tuple of Ellipse
    coil_model : {"ring", "uniform"}
        "ring" (default) places Gaussian sensitivity bumps on a ring;
        "uniform" sets every sensitivity to 1 (useful for single-coil
        sanity checks where the coil images must equal the phantom).
    """

    nx: int
    ny: int
    nc: int
    noise_db: float | None = None
    seed: int = 0
    jitter: float = 0.0
    ellipses: tuple = field(default=DEFAULT_ELLIPSES)
    coil_model: str = "ring"

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1 or self.nc < 1:
            raise ConfigError(
                f"grid and coil counts must be positive, got "
                f"{self.nx}x{self.ny}x{self.nc}"
            )
        if not 0.0 <= self.jitter <= 1.0:
            raise ConfigError(f"jitter must be in [0, 1], got {self.jitter}")
        if self.coil_model not in ("ring", "uniform"):
            raise ConfigError(
                f"coil_model must be 'ring' or 'uniform', got {self.coil_model!r}"
            )
        for i, e in enumerate(self.ellipses):
            if not (e.a > 0 and e.b > 0 and np.isfinite(e.amplitude)):
                raise ConfigError(
                    f"ellipse {i}: semi-axes must be positive and the "
                    f"amplitude finite"
                )
            # Tight bounding box of the rotated ellipse; it must fit in
            # the [-1, 1]^2 field of view.
            cos_t, sin_t = np.cos(e.theta), np.sin(e.theta)
            ext_x = np.hypot(e.a * cos_t, e.b * sin_t)
            ext_y = np.hypot(e.a * sin_t, e.b * cos_t)
            if abs(e.cx) + ext_x > 1.0 or abs(e.cy) + ext_y > 1.0:
                raise ConfigError(
                    f"ellipse {i} extends outside the [-1, 1]^2 field of view"
                )


def phantom_image(spec: PhantomSpec) -> np.ndarray:
    """Paint the ellipse phantom on the spec's grid; real (nx, ny)."""
    u = (np.arange(spec.nx) - spec.nx // 2) / (spec.nx / 2.0)
    v = (np.arange(spec.ny) - spec.ny // 2) / (spec.ny / 2.0)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    img = np.zeros((spec.nx, spec.ny))
    for e in spec.ellipses:
        du, dv = uu - e.cx, vv - e.cy
        cos_t, sin_t = np.cos(e.theta), np.sin(e.theta)
        major = (du * cos_t + dv * sin_t) / e.a
        minor = (-du * sin_t + dv * cos_t) / e.b
        img[major**2 + minor**2 <= 1.0] += e.amplitude
    return img


def coil_sensitivities(spec: PhantomSpec, rng=None) -> np.ndarray:
    """Smooth complex coil maps, shape (nx, ny, nc).

    Each coil is a Gaussian bump centered on a ring around the field of
    view with a coil-specific constant plus linear phase, so k-space
    responses are compact, mutually shifted, and non-degenerate.  The
    bumps never vanish, so the maps have no common zero anywhere.
    With ``coil_model="uniform"`` every map is identically 1.
    """
    if spec.coil_model == "uniform":
        return np.ones((spec.nx, spec.ny, spec.nc), dtype=np.complex128)
    u = (np.arange(spec.nx) - spec.nx // 2) / (spec.nx / 2.0)
    v = (np.arange(spec.ny) - spec.ny // 2) / (spec.ny / 2.0)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    angles = 2.0 * np.pi * np.arange(spec.nc) / spec.nc
    if spec.jitter > 0 and rng is not None:
        spacing = 2.0 * np.pi / spec.nc
        angles = angles + spec.jitter * spacing * (rng.random(spec.nc) - 0.5)
    maps = np.empty((spec.nx, spec.ny, spec.nc), dtype=np.complex128)
    for c, ang in enumerate(angles):
        pu = _COIL_RING_RADIUS * np.cos(ang)
        pv = _COIL_RING_RADIUS * np.sin(ang)
        bump = np.exp(-((uu - pu) ** 2 + (vv - pv) ** 2) / (2.0 * _COIL_WIDTH**2))
        # Constant + gentle linear phase, fixed per coil index.
        phase = 0.7 * c + 0.9 * np.cos(ang) * uu + 0.9 * np.sin(ang) * vv
        maps[:, :, c] = bump * np.exp(1j * phase)
    return maps


def make_phantom(spec: PhantomSpec):
    """Build the synthetic acquisition.

    Returns
    -------
    kspace : MultiCoilKSpace
        Noisy (or noiseless) multi-coil k-space.
    coil_images : ndarray (nx, ny, nc)
        The clean coil images the k-space was generated from.
    """
    rng = RngSeed(spec.seed).stream(STREAM_PHANTOM)
    img = phantom_image(spec)
    maps = coil_sensitivities(spec, rng)
    coil_images = img[:, :, None] * maps
    kspace = image_to_kspace(coil_images)
    if spec.noise_db is not None:
        n_samples = kspace.size
        signal_norm = np.linalg.norm(kspace)
        noise_norm = signal_norm * 10.0 ** (-spec.noise_db / 20.0)
        sigma = noise_norm / np.sqrt(2.0 * n_samples)
        noise = sigma * (
            rng.standard_normal(kspace.shape) + 1j * rng.standard_normal(kspace.shape)
        )
        kspace = kspace + noise
    return MultiCoilKSpace(kspace), coil_images
