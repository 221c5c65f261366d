"""Centered, orthonormal 2-D Fourier transforms over the spatial axes.

k-space arrays are (nx, ny, nc); transforms act on axes (0, 1) coil by
coil.  The DC sample sits at the array center (nx//2, ny//2).  With the
"ortho" normalization the transforms are unitary, so Frobenius norms (and
therefore SNRs) agree between k-space and image space.
"""
from __future__ import annotations

import numpy as np

_AXES = (0, 1)


def kspace_to_image(kspace: np.ndarray) -> np.ndarray:
    """Centered orthonormal inverse FFT: k-space -> coil images."""
    shifted = np.fft.ifftshift(kspace, axes=_AXES)
    img = np.fft.ifft2(shifted, axes=_AXES, norm="ortho")
    return np.fft.fftshift(img, axes=_AXES)


def image_to_kspace(images: np.ndarray) -> np.ndarray:
    """Centered orthonormal FFT: coil images -> k-space."""
    shifted = np.fft.ifftshift(images, axes=_AXES)
    ksp = np.fft.fft2(shifted, axes=_AXES, norm="ortho")
    return np.fft.fftshift(ksp, axes=_AXES)


def root_sum_of_squares(images: np.ndarray) -> np.ndarray:
    """Combine coil images into a single magnitude image."""
    return np.sqrt(np.sum(np.abs(images) ** 2, axis=-1))
