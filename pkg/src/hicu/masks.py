"""Cartesian undersampling pattern generators.

Two families, both with a fully sampled center and an exact sample
budget of (grid size) / R:

* ``S1`` — independent random k-space points plus a fully sampled
  center block.
* ``S2`` — full readout lines (complete columns of constant phase
  encode), drawn without replacement with variable density that decays
  quadratically away from the center, plus a block of center lines.

Both are deterministic given (spec.seed); the achieved sampling fraction
is always within 2% (relative) of 1/R, or generation fails loudly.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .arrays import SamplingMask
from .errors import ConfigError
from .rng import STREAM_MASK, RngSeed

PATTERNS = ("S1", "S2")

# Width of the variable-density profile for S2, as a fraction of the
# phase-encode extent.
_S2_SIGMA_FRACTION = 0.125

# The achieved sampling fraction must stay within this relative band
# around the requested 1/R.
_BUDGET_TOLERANCE = 0.02


@dataclass(frozen=True)
class MaskSpec:
    """Recipe for an undersampling pattern.

    Parameters
    ----------
    pattern : {"S1", "S2"}
    accel : float
        Acceleration factor R >= 1; the mask samples ~1/R of the grid.
    center_fraction : float
        Side of the fully sampled center, as a fraction of each axis
        (block for S1, line band for S2).  Default keeps a 24-wide center
        on a 384 grid.
    seed : int
    """

    pattern: str
    accel: float
    center_fraction: float = 0.0625
    seed: int = 0

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ConfigError(
                f"unknown pattern {self.pattern!r}; choose from {PATTERNS}"
            )
        if not self.accel >= 1:
            raise ConfigError(f"accel must be >= 1, got {self.accel}")
        if not 0.0 <= self.center_fraction <= 1.0:
            raise ConfigError(
                f"center_fraction must be in [0, 1], got {self.center_fraction}"
            )


def _center_block(n: int, fraction: float) -> slice:
    width = min(ceil(fraction * n), n)
    start = (n - width) // 2
    return slice(start, start + width)


def _check_budget(mask: np.ndarray, accel: float) -> None:
    achieved = mask.mean()
    target = 1.0 / accel
    if abs(achieved - target) > _BUDGET_TOLERANCE * target:
        raise ConfigError(
            f"achieved sampling fraction {achieved:.4f} misses 1/R = "
            f"{target:.4f} by more than {100 * _BUDGET_TOLERANCE:.0f}%; "
            "this grid size / acceleration combination cannot meet the budget"
        )


def make_mask(spec: MaskSpec, nx: int, ny: int) -> SamplingMask:
    """Generate a deterministic sampling mask.

    Returns
    -------
    SamplingMask, shape (nx, ny)

    Raises
    ------
    ConfigError
        If the fully sampled center does not fit in the sample budget, or
        quantization pushes the achieved fraction more than 2% away from
        1/R.
    """
    if nx < 1 or ny < 1:
        raise ConfigError(f"grid must be non-empty, got {nx}x{ny}")
    rng = RngSeed(spec.seed).stream(STREAM_MASK)
    if spec.pattern == "S1":
        mask = _make_s1(nx, ny, spec, rng)
    else:
        mask = _make_s2(nx, ny, spec, rng)
    _check_budget(mask, spec.accel)
    return SamplingMask(mask)


def _make_s1(nx: int, ny: int, spec: MaskSpec, rng: np.random.Generator) -> np.ndarray:
    total = nx * ny
    budget = int(round(total / spec.accel))
    mask = np.zeros((nx, ny), dtype=bool)
    if spec.center_fraction > 0:
        mask[_center_block(nx, spec.center_fraction), _center_block(ny, spec.center_fraction)] = True
    n_center = int(mask.sum())
    remaining = budget - n_center
    if remaining < 0:
        raise ConfigError(
            f"center block holds {n_center} samples but the budget at "
            f"R={spec.accel} is only {budget}; shrink center_fraction"
        )
    open_idx = np.flatnonzero(~mask.ravel())
    picked = rng.permutation(open_idx.size)[:remaining]
    flat = mask.ravel()
    flat[open_idx[picked]] = True
    return flat.reshape(nx, ny)


def _make_s2(nx: int, ny: int, spec: MaskSpec, rng: np.random.Generator) -> np.ndarray:
    n_lines = int(round(ny / spec.accel))
    line_on = np.zeros(ny, dtype=bool)
    if spec.center_fraction > 0:
        line_on[_center_block(ny, spec.center_fraction)] = True
    n_center = int(line_on.sum())
    remaining = n_lines - n_center
    if remaining < 0:
        raise ConfigError(
            f"center band holds {n_center} lines but the budget at "
            f"R={spec.accel} is only {n_lines}; shrink center_fraction"
        )
    open_lines = np.flatnonzero(~line_on)
    if remaining > open_lines.size:
        raise ConfigError("line budget exceeds the number of available lines")
    if remaining > 0:
        center = (ny - 1) / 2.0
        sigma = _S2_SIGMA_FRACTION * ny
        dist = np.abs(open_lines - center)
        weights = (1.0 + dist / sigma) ** -2.0
        weights /= weights.sum()
        picked = rng.choice(open_lines, size=remaining, replace=False, p=weights)
        line_on[picked] = True
    mask = np.zeros((nx, ny), dtype=bool)
    mask[:, line_on] = True
    return mask
