"""Plug-in image-domain denoisers applied between descent steps.

The solver hands k-space to `denoise`, which moves to the image domain
(centered orthonormal IFFT), runs a denoiser over the coil images, and
transforms back.  Three denoisers ship here:

* `IdentityDenoiser` — pass-through (plain alternating minimization).
* `SwtDenoiser` — soft thresholding of stationary wavelet detail bands,
  threshold proportional to the most recent line-search step size.
* `ExternalDenoiser` — a child process speaking the HICUDNZ1 frame
  protocol over stdin/stdout, one request per call.

The stationary (undecimated) wavelet transform is implemented directly
with periodic shifts: analysis at level j correlates with the base
filters dilated by 2**j, synthesis applies adjoints and divides by 4 per
level, which reconstructs exactly for the orthonormal filter pairs used
here.  Any grid size works; no padding is needed.

HICUDNZ1 frame layout (little endian): 8-byte magic ``HICUDNZ1``, u32
nx, ny, nc, then nx*ny*nc coil-image samples as interleaved float32
(re, im) pairs, x fastest, then y, then coil.  The server answers every
request frame with one frame of identical shape.
"""
from __future__ import annotations

import os
import select
import shlex
import shutil
import struct
import subprocess
import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DenoiserError, DimensionError
from .fileio import pack_complex_grid, unpack_complex_grid
from .fourier import image_to_kspace, kspace_to_image

DENOISE_MAGIC = b"HICUDNZ1"

# Orthonormal scaling (lowpass) filters; highpass follows by the
# quadrature mirror rule g[k] = (-1)^k h[L-1-k].
_SQRT3 = np.sqrt(3.0)
WAVELETS = {
    "haar": np.array([1.0, 1.0]) / np.sqrt(2.0),
    "db2": np.array([1.0 + _SQRT3, 3.0 + _SQRT3, 3.0 - _SQRT3, 1.0 - _SQRT3])
    / (4.0 * np.sqrt(2.0)),
}


def _filters(wavelet: str):
    try:
        low = WAVELETS[wavelet]
    except KeyError:
        raise ConfigError(
            f"unknown wavelet {wavelet!r}; choose from {sorted(WAVELETS)}"
        ) from None
    # Quadrature mirror rule g[k] = (-1)^k h[L-1-k].
    length = len(low)
    high = np.array([(-1.0) ** k * low[length - 1 - k] for k in range(length)])
    return low, high


def soft(values: np.ndarray, threshold: float) -> np.ndarray:
    """Complex soft thresholding: shrink magnitudes by `threshold`,
    preserve phase, send magnitudes below the threshold to zero.

    Equivalently, the proximal map of ``threshold * |.|``:
    ``soft(x, t) = argmin_z t*|z| + 0.5*|z - x|**2`` applied entrywise.
    Non-positive thresholds return an unmodified copy.
    """
    if threshold <= 0.0:
        return np.asarray(values).copy()
    mag = np.abs(values)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > 0.0, np.maximum(mag - threshold, 0.0) / mag, 0.0)
    return values * scale


def _analyze_1d(arr: np.ndarray, filt: np.ndarray, dilation: int, axis: int) -> np.ndarray:
    out = np.zeros_like(arr, dtype=np.complex128)
    for k, coeff in enumerate(filt):
        out += coeff * np.roll(arr, -dilation * k, axis=axis)
    return out


def _adjoint_1d(arr: np.ndarray, filt: np.ndarray, dilation: int, axis: int) -> np.ndarray:
    out = np.zeros_like(arr, dtype=np.complex128)
    for k, coeff in enumerate(filt):
        out += coeff * np.roll(arr, dilation * k, axis=axis)
    return out


@dataclass
class SwtCoefficients:
    """Undecimated wavelet bands of a coil-image stack.

    details[j] = (band_gx, band_gy, band_gg) at level j (coarser with
    increasing j); `approx` is the final lowpass residue.  All bands have
    the full input shape.
    """

    approx: np.ndarray
    details: list
    wavelet: str

    @property
    def levels(self) -> int:
        return len(self.details)


def swt_forward(images: np.ndarray, wavelet: str = "haar", levels: int = 2) -> SwtCoefficients:
    """Undecimated 2-D wavelet analysis over axes (0, 1).

    Trailing axes (e.g. coils) are carried along unchanged, so a whole
    multi-coil stack transforms in one call.
    """
    if levels < 1:
        raise ConfigError(f"levels must be at least 1, got {levels}")
    low, high = _filters(wavelet)
    approx = np.asarray(images, dtype=np.complex128)
    details = []
    for j in range(levels):
        d = 2**j
        lo_x = _analyze_1d(approx, low, d, 0)
        hi_x = _analyze_1d(approx, high, d, 0)
        band_gx = _analyze_1d(hi_x, low, d, 1)
        band_gy = _analyze_1d(lo_x, high, d, 1)
        band_gg = _analyze_1d(hi_x, high, d, 1)
        approx = _analyze_1d(lo_x, low, d, 1)
        details.append((band_gx, band_gy, band_gg))
    return SwtCoefficients(approx, details, wavelet)


def swt_inverse(coeffs: SwtCoefficients) -> np.ndarray:
    """Exact inverse of `swt_forward` (adjoint synthesis, /4 per level)."""
    low, high = _filters(coeffs.wavelet)
    approx = coeffs.approx
    for j in range(coeffs.levels - 1, -1, -1):
        d = 2**j
        band_gx, band_gy, band_gg = coeffs.details[j]
        acc = _adjoint_1d(_adjoint_1d(approx, low, d, 1), low, d, 0)
        acc += _adjoint_1d(_adjoint_1d(band_gx, low, d, 1), high, d, 0)
        acc += _adjoint_1d(_adjoint_1d(band_gy, high, d, 1), low, d, 0)
        acc += _adjoint_1d(_adjoint_1d(band_gg, high, d, 1), high, d, 0)
        approx = acc / 4.0
    return approx


def _shrink_details(coeffs: SwtCoefficients, threshold: float) -> SwtCoefficients:
    """Soft-threshold every detail band; the approximation band is kept."""
    shrunk = [
        tuple(soft(band, threshold) for band in level)
        for level in coeffs.details
    ]
    return SwtCoefficients(coeffs.approx.copy(), shrunk, coeffs.wavelet)


def swt_soft_threshold(images: np.ndarray, threshold: float,
                       wavelet: str = "haar", levels: int = 2) -> np.ndarray:
    """Wavelet-domain shrinkage of an image (or coil-image stack).

    Analysis, soft thresholding of the detail bands (the approximation
    band passes through untouched), exact synthesis.  A zero threshold
    reproduces the input up to transform roundoff.
    """
    coeffs = swt_forward(images, wavelet, levels)
    return swt_inverse(_shrink_details(coeffs, threshold))


@dataclass(frozen=True)
class DenoiseContext:
    """Per-call context handed to denoisers.

    eta is the line-search step size of the most recent descent step
    (non-negative); step-proportional denoisers scale their strength by
    it, so shrinkage fades as the iteration converges.  stage/outer/inner
    locate the call in the solver schedule (0-based stage, 1-based
    iteration counters; all 0 outside a solver run).
    """

    eta: float = 0.0
    stage: int = 0
    outer: int = 0
    inner: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.eta) and self.eta >= 0.0):
            raise ConfigError(f"eta must be finite and non-negative, got {self.eta}")


class IdentityDenoiser:
    """Pass-through denoiser."""

    kind = "identity"

    def denoise_images(self, images: np.ndarray, ctx: DenoiseContext) -> np.ndarray:
        return images

    def close(self):
        pass


class SwtDenoiser:
    """Soft thresholding in the undecimated wavelet domain.

    The threshold is ``threshold_scale * max(ctx.eta, 0)``: proportional
    to the current step size, so the denoiser relaxes as steps shrink.
    Only detail bands are thresholded.

    Attributes
    ----------
    last_threshold : float
        Threshold used by the most recent call (for inspection/tests).
    """

    kind = "swt"

    def __init__(self, wavelet: str = "haar", levels: int = 2,
                 threshold_scale: float = 0.2):
        if threshold_scale < 0:
            raise ConfigError(
                f"threshold_scale must be non-negative, got {threshold_scale}"
            )
        _filters(wavelet)  # validate name early
        if levels < 1:
            raise ConfigError(f"levels must be at least 1, got {levels}")
        self.wavelet = wavelet
        self.levels = levels
        self.threshold_scale = threshold_scale
        self.last_threshold = 0.0

    def denoise_images(self, images: np.ndarray, ctx: DenoiseContext) -> np.ndarray:
        threshold = self.threshold_scale * max(ctx.eta, 0.0)
        self.last_threshold = threshold
        if threshold == 0.0:
            return images
        coeffs = swt_forward(images, self.wavelet, self.levels)
        return swt_inverse(_shrink_details(coeffs, threshold))

    def close(self):
        pass


def pack_frame(images: np.ndarray) -> bytes:
    """Serialize coil images as one HICUDNZ1 frame."""
    arr = np.asarray(images, dtype=np.complex128)
    if arr.ndim != 3:
        raise DimensionError(f"frame payload must be 3-D, got shape {arr.shape}")
    nx, ny, nc = arr.shape
    header = DENOISE_MAGIC + struct.pack("<III", nx, ny, nc)
    return header + pack_complex_grid(arr)


def unpack_frame(blob: bytes) -> np.ndarray:
    """Parse one complete HICUDNZ1 frame into a complex128 (nx, ny, nc) array."""
    if len(blob) < 20 or blob[:8] != DENOISE_MAGIC:
        raise DenoiserError("malformed denoiser frame header")
    nx, ny, nc = struct.unpack("<III", blob[8:20])
    return unpack_complex_grid(blob[20:], nx, ny, nc)


class ExternalDenoiser:
    """Client for an out-of-process denoiser speaking HICUDNZ1 frames.

    The command is started lazily on the first call and kept alive: each
    denoise call writes one request frame to its stdin and reads exactly
    one response frame of the same shape from its stdout.  Any protocol
    violation (dead process, short read, bad magic, shape change, or no
    answer within `timeout` seconds) raises DenoiserError.
    """

    kind = "external"

    def __init__(self, command, timeout: float = 30.0):
        if isinstance(command, str):
            command = shlex.split(command)
        if not command:
            raise ConfigError("external denoiser command is empty")
        if shutil.which(command[0]) is None:
            raise ConfigError(
                f"external denoiser executable {command[0]!r} was not found"
            )
        if timeout <= 0:
            raise ConfigError(f"timeout must be positive, got {timeout}")
        self.command = list(command)
        self.timeout = float(timeout)
        self._proc = None

    def _ensure_started(self):
        if self._proc is not None and self._proc.poll() is None:
            return
        if self._proc is not None:
            raise DenoiserError(
                f"denoiser process exited with code {self._proc.returncode}"
            )
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
        except OSError as exc:
            raise DenoiserError(
                f"could not start denoiser command {self.command!r}: {exc}"
            ) from exc

    def _read_exact(self, nbytes: int, deadline: float) -> bytes:
        fd = self._proc.stdout.fileno()
        chunks = []
        got = 0
        while got < nbytes:
            remaining = deadline - _monotonic()
            if remaining <= 0:
                raise DenoiserError(
                    f"denoiser did not answer within {self.timeout} s"
                )
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = os.read(fd, nbytes - got)
            if not chunk:
                code = self._proc.poll()
                raise DenoiserError(
                    "denoiser closed its output mid-frame"
                    + (f" (exit code {code})" if code is not None else "")
                )
            chunks.append(chunk)
            got += len(chunk)
        return b"".join(chunks)

    def denoise_images(self, images: np.ndarray, ctx: DenoiseContext) -> np.ndarray:
        arr = np.asarray(images, dtype=np.complex128)
        self._ensure_started()
        frame = pack_frame(arr)
        deadline = _monotonic() + self.timeout
        try:
            self._proc.stdin.write(frame)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            code = self._proc.poll()
            raise DenoiserError(
                "could not send frame to denoiser"
                + (f" (exit code {code})" if code is not None else f": {exc}")
            ) from exc
        header = self._read_exact(20, deadline)
        if header[:8] != DENOISE_MAGIC:
            raise DenoiserError("denoiser answered with a bad magic")
        nx, ny, nc = struct.unpack("<III", header[8:20])
        if (nx, ny, nc) != arr.shape:
            raise DenoiserError(
                f"denoiser answered with shape {(nx, ny, nc)}, sent {arr.shape}"
            )
        payload = self._read_exact(nx * ny * nc * 8, deadline)
        return unpack_complex_grid(payload, nx, ny, nc)

    def close(self):
        proc, self._proc = self._proc, None
        if proc is None:
            return
        try:
            proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=2.0)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def _monotonic() -> float:
    return time.monotonic()


def denoise(kspace: np.ndarray, ctx: DenoiseContext, handle) -> np.ndarray:
    """Run an image-domain denoiser on k-space.

    Transforms to coil images (centered orthonormal IFFT), applies the
    handle, transforms back.  Returns a new array; the input is untouched.
    The identity denoiser short-circuits the transforms entirely, so its
    output is bitwise equal to its input.

    Raises
    ------
    DenoiserError
        If the handle changes the stack shape or produces non-finite
        values (or, for external handles, violates the frame protocol).
    """
    arr = np.asarray(kspace, dtype=np.complex128)
    if getattr(handle, "kind", None) == "identity":
        return arr.copy()
    images = kspace_to_image(arr)
    cleaned = handle.denoise_images(images, ctx)
    cleaned = np.asarray(cleaned, dtype=np.complex128)
    if cleaned.shape != images.shape:
        raise DenoiserError(
            f"denoiser changed the stack shape from {images.shape} to {cleaned.shape}"
        )
    if not np.all(np.isfinite(cleaned)):
        raise DenoiserError("denoiser produced non-finite values")
    return image_to_kspace(cleaned)
