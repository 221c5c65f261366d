"""Alternating-minimization driver for structured low-rank k-space
completion.

Each outer iteration re-estimates the signal subspace of the convolution
matrix over the current stage's region (randomized SVD), takes the
orthogonal complement as annihilating filters, and runs a few inner
descent steps on the unsampled entries: random compression of the filter
bank, gradient of the compressed annihilation cost, exact line search,
optional image-domain denoising, then hard data consistency.  Stages
order the work center-out: a small fully-featured center region first,
then the full grid.
"""
from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field
from math import ceil
from typing import NamedTuple

import numpy as np

from .arrays import (
    KernelSpec,
    MultiCoilKSpace,
    Region,
    as_kspace_array,
    as_mask_array,
)
from .denoise import DenoiseContext, IdentityDenoiser, denoise
from .errors import ConfigError, DegenerateDirectionWarning, DimensionError
from .kspace import (
    ConvolutionOperator,
    _line_search_from_products,
    adjoint_scatter,
    apply_filters,
)
from .lowrank import householder_complement, jl_compress, rsvd_right_vectors
from .metrics import snr_db
from .rng import STREAM_JL, STREAM_RSVD, RngSeed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StageConfig:
    """One stage of the center-out schedule.

    Parameters
    ----------
    fraction : float
        Linear size of the stage's centered region as a fraction of each
        axis; 1.0 covers the whole grid.
    p : int
        Compressed filter count per descent step (clamped to the
        available nullspace dimension at run time).
    g_steps : int
        Inner descent steps per outer iteration.
    denoise : bool
        Whether the plug-in denoiser runs in this stage.
    outer_iters : int
        Number of outer (subspace re-estimation) iterations.
    """

    fraction: float
    p: int
    g_steps: int
    denoise: bool
    outer_iters: int

    def __post_init__(self):
        if not 0.0 < self.fraction <= 1.0:
            raise ConfigError(f"fraction must be in (0, 1], got {self.fraction}")
        if self.p < 1:
            raise ConfigError(f"p must be at least 1, got {self.p}")
        if self.g_steps < 1:
            raise ConfigError(f"g_steps must be at least 1, got {self.g_steps}")
        if self.outer_iters < 1:
            raise ConfigError(
                f"outer_iters must be at least 1, got {self.outer_iters}"
            )


def default_stages(outer_center: int = 10, outer_full: int = 10,
                   denoise_full: bool = False):
    """The standard two-stage schedule: quarter-size center region first
    (p=8, 5 inner steps), then the full grid (p=32, 10 inner steps)."""
    return (
        StageConfig(0.25, 8, 5, False, outer_center),
        StageConfig(1.0, 32, 10, denoise_full, outer_full),
    )


@dataclass(frozen=True)
class SolverConfig:
    """Solver-wide settings.

    Parameters
    ----------
    rank : int
        Signal subspace rank r; filters span the remaining n - r
        directions.
    stages : sequence of StageConfig
        Regions must be nested: each stage's region lies inside the
        next stage's region (checked when the run starts).
    kernel_size : (int, int)
        Sliding neighborhood size (kx, ky), both odd.
    seed : int
        Master seed for all random draws (sketching + compression).
    max_wall_clock : float or None
        Wall-clock budget in seconds; the run stops (flagged truncated)
        once exceeded.
    trace_every : int
        Keep every k-th inner trace record (stage anchors and the last
        step of each outer iteration are always kept).
    oversample, power_iters : int
        Randomized SVD tuning.
    jl_probe : {"gaussian", "identity"}
        Compression probe; "identity" is the deterministic test hook.
    """

    rank: int
    stages: tuple = field(default_factory=default_stages)
    kernel_size: tuple = (3, 3)
    seed: int = 0
    max_wall_clock: float | None = None
    trace_every: int = 1
    oversample: int = 10
    power_iters: int = 2
    jl_probe: str = "gaussian"

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if self.rank < 1:
            raise ConfigError(f"rank must be at least 1, got {self.rank}")
        if not self.stages:
            raise ConfigError("at least one stage is required")
        kx, ky = self.kernel_size
        if kx % 2 == 0 or ky % 2 == 0 or kx < 1 or ky < 1:
            raise ConfigError(
                f"kernel sides must be odd positive, got {kx}x{ky}"
            )
        if self.trace_every < 1:
            raise ConfigError(f"trace_every must be >= 1, got {self.trace_every}")
        if self.max_wall_clock is not None and self.max_wall_clock <= 0:
            raise ConfigError(
                f"max_wall_clock must be positive, got {self.max_wall_clock}"
            )
        if self.jl_probe not in ("gaussian", "identity"):
            raise ConfigError(f"unknown jl_probe {self.jl_probe!r}")


@dataclass(frozen=True)
class TraceRecord:
    """One progress sample: cost/step of an inner iteration (inner=0 is
    the anchor taken before the first step of each outer iteration)."""

    wall_time_s: float
    outer: int
    inner: int
    cost: float
    eta: float
    snr_db: float | None = None


class SolverResult(NamedTuple):
    kspace: MultiCoilKSpace
    trace: list
    truncated: bool


def center_region(nx: int, ny: int, fraction: float, kernel: KernelSpec) -> Region:
    """Centered block of output positions covering `fraction` of each axis.

    The block is ceil(fraction*nx) by ceil(fraction*ny), centered, then
    shrunk to the valid-convolution interior (positions whose kernel
    neighborhood stays inside the grid).  fraction=1 gives the full valid
    region.

    Raises
    ------
    ConfigError
        If fraction is outside (0, 1] or the shrunk block is smaller than
        the kernel.
    """
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"fraction must be in (0, 1], got {fraction}")
    if nx < kernel.kx or ny < kernel.ky:
        raise ConfigError(
            f"grid ({nx}, {ny}) is smaller than the kernel "
            f"{kernel.kx}x{kernel.ky}"
        )
    want_w = min(ceil(fraction * nx), nx)
    want_h = min(ceil(fraction * ny), ny)
    x0 = (nx - want_w) // 2
    y0 = (ny - want_h) // 2
    lo_x = max(x0, kernel.hx)
    hi_x = min(x0 + want_w, nx - kernel.hx)
    lo_y = max(y0, kernel.hy)
    hi_y = min(y0 + want_h, ny - kernel.hy)
    width = hi_x - lo_x
    height = hi_y - lo_y
    if width < kernel.kx or height < kernel.ky:
        raise ConfigError(
            f"center region {width}x{height} (fraction {fraction} of "
            f"{nx}x{ny}) is smaller than the {kernel.kx}x{kernel.ky} kernel"
        )
    return Region(lo_x, lo_y, width, height)


def data_consistency(estimate, measured, mask) -> np.ndarray:
    """Replace the estimate with the measured values at sampled locations."""
    est = as_kspace_array(estimate)
    meas = as_kspace_array(measured)
    m = as_mask_array(mask)
    if est.shape != meas.shape or m.shape != est.shape[:2]:
        raise DimensionError(
            f"shape mismatch: estimate {est.shape}, measured {meas.shape}, "
            f"mask {m.shape}"
        )
    return np.where(m[:, :, None], meas, est)


def hicu_run(measured, mask, config: SolverConfig, *, reference=None,
             denoiser=None, callback=None) -> SolverResult:
    """Run the full reconstruction.

    Parameters
    ----------
    measured : MultiCoilKSpace or ndarray (nx, ny, nc)
        Acquired k-space; values outside the mask are ignored.
    mask : SamplingMask or ndarray (nx, ny)
    config : SolverConfig
    reference : optional ground-truth k-space; enables SNR in the trace.
    denoiser : optional denoiser handle (identity when omitted); only
        used in stages with ``denoise=True``.
    callback : optional callable invoked with each emitted TraceRecord.

    Returns
    -------
    SolverResult
        Final k-space (always data consistent), trace records, and
        whether the wall-clock budget cut the run short.
    """
    z = as_kspace_array(measured)
    m = as_mask_array(mask)
    nx, ny, nc = z.shape
    if m.shape != (nx, ny):
        raise DimensionError(
            f"mask shape {m.shape} does not match k-space grid {(nx, ny)}"
        )
    ref = None
    if reference is not None:
        ref = as_kspace_array(reference)
        if ref.shape != z.shape:
            raise DimensionError(
                f"reference shape {ref.shape} does not match data {z.shape}"
            )
    kernel = KernelSpec(config.kernel_size[0], config.kernel_size[1], nc)
    if config.rank >= kernel.n:
        raise ConfigError(
            f"rank {config.rank} leaves no nullspace for a patch length "
            f"of {kernel.n}"
        )
    regions = [center_region(nx, ny, s.fraction, kernel) for s in config.stages]
    for first, second in zip(regions, regions[1:]):
        if not second.contains(first):
            raise ConfigError(
                "stage regions must be nested: each stage's region must lie "
                f"inside the next ({first} is not inside {second})"
            )
    if denoiser is None:
        denoiser = IdentityDenoiser()
    seed = RngSeed(config.seed)

    y = np.where(m[:, :, None], z, 0.0).astype(np.complex128)
    z = np.where(m[:, :, None], z, 0.0).astype(np.complex128)
    trace: list[TraceRecord] = []
    start = time.monotonic()
    truncated = False

    def emit(outer, inner, cost, eta, w):
        rec = TraceRecord(
            wall_time_s=time.monotonic() - start,
            outer=outer,
            inner=inner,
            cost=cost,
            eta=eta,
            snr_db=None if ref is None else snr_db(w, ref),
        )
        trace.append(rec)
        if callback is not None:
            callback(rec)

    def out_of_time():
        return (
            config.max_wall_clock is not None
            and time.monotonic() - start > config.max_wall_clock
        )

    outer = 0
    for stage_idx, (stage, region) in enumerate(zip(config.stages, regions)):
        if truncated:
            break
        for _ in range(stage.outer_iters):
            if out_of_time():
                truncated = True
                break
            outer += 1
            op = ConvolutionOperator(y, kernel, region)
            subspace = rsvd_right_vectors(
                op,
                config.rank,
                oversample=config.oversample,
                power_iters=config.power_iters,
                seed=seed.stream(STREAM_RSVD, outer),
            )
            basis = householder_complement(subspace)
            p_eff = min(stage.p, basis.q)
            if p_eff < stage.p:
                logger.info(
                    "stage requests p=%d but only %d nullspace directions "
                    "exist; clamping",
                    stage.p,
                    basis.q,
                )
            w = y
            for j in range(1, stage.g_steps + 1):
                if out_of_time():
                    truncated = True
                    break
                filters = jl_compress(
                    basis,
                    p_eff,
                    seed=seed.stream(STREAM_JL, outer, j),
                    probe=config.jl_probe,
                )
                rows = apply_filters(w, filters, kernel, region)
                if j == 1:
                    emit(outer, 0, float(np.vdot(rows, rows).real), 0.0, w)
                grad = 2.0 * adjoint_scatter(rows, filters, kernel, region, w.shape)
                grad[m] = 0.0
                step_rows = apply_filters(grad, filters, kernel, region)
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always", DegenerateDirectionWarning)
                    eta = _line_search_from_products(rows, step_rows)
                for warned in caught:
                    logger.warning(
                        "outer %d inner %d: %s", outer, j, warned.message
                    )
                w = w - eta * grad
                if stage.denoise:
                    ctx = DenoiseContext(
                        eta=max(eta, 0.0), stage=stage_idx, outer=outer, inner=j
                    )
                    w = denoise(w, ctx, denoiser)
                w = data_consistency(w, z, m)
                after = apply_filters(w, filters, kernel, region)
                cost = float(np.vdot(after, after).real)
                if (
                    j % config.trace_every == 0
                    or j == stage.g_steps
                ):
                    emit(outer, j, cost, eta, w)
            y = w
    return SolverResult(MultiCoilKSpace(y), trace, truncated)
