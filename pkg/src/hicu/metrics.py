"""Reconstruction quality metrics and trace summaries."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arrays import MultiCoilKSpace
from .errors import DimensionError


def _as_array(x) -> np.ndarray:
    if isinstance(x, MultiCoilKSpace):
        return x.data
    return np.asarray(x)


def nmse(estimate, reference) -> float:
    """Normalized mean squared error ||est - ref||^2 / ||ref||^2."""
    est = _as_array(estimate)
    ref = _as_array(reference)
    if est.shape != ref.shape:
        raise DimensionError(
            f"estimate shape {est.shape} does not match reference {ref.shape}"
        )
    ref_energy = float(np.vdot(ref, ref).real)
    if ref_energy == 0.0:
        raise ValueError("reference has zero energy; NMSE is undefined")
    diff = est - ref
    return float(np.vdot(diff, diff).real) / ref_energy


def snr_db(estimate, reference) -> float:
    """Signal-to-error ratio in dB: 20*log10(||ref|| / ||est - ref||).

    Higher is better; a bit-exact estimate returns +inf.
    """
    err = nmse(estimate, reference)
    if err == 0.0:
        return math.inf
    return -10.0 * math.log10(err)


@dataclass(frozen=True)
class SnrReport:
    """SNR of an estimate against a reference, with the underlying norms.

    `against` identifies the reference (typically a file path; empty when
    compared in memory).  Always snr_db = -10*log10(nmse).
    """

    snr_db: float
    nmse: float
    reference_norm: float
    error_norm: float
    against: str = ""

    @classmethod
    def compare(cls, estimate, reference, against: str = "") -> "SnrReport":
        est = _as_array(estimate)
        ref = _as_array(reference)
        e = nmse(est, ref)
        ref_norm = float(np.linalg.norm(ref))
        return cls(
            snr_db=math.inf if e == 0.0 else -10.0 * math.log10(e),
            nmse=e,
            reference_norm=ref_norm,
            error_norm=math.sqrt(e) * ref_norm,
            against=against,
        )


@dataclass(frozen=True)
class TraceSummary:
    """Headline numbers of one solver trace."""

    peak_snr_db: float | None
    time_to_peak_s: float | None
    final_snr_db: float | None
    final_cost: float | None
    n_records: int


def summarize_trace(records) -> TraceSummary:
    """Summarize solver trace records (objects or dicts).

    SNR fields may be missing (no reference during the run); the summary
    then reports None for the SNR-derived numbers.

    Raises
    ------
    ValueError
        If the trace is empty.
    """

    def field(rec, name):
        if isinstance(rec, dict):
            return rec.get(name)
        return getattr(rec, name, None)

    records = list(records)
    if not records:
        raise ValueError("cannot summarize an empty trace")
    final_cost = field(records[-1], "cost")
    with_snr = [r for r in records if field(r, "snr_db") is not None]
    if not with_snr:
        return TraceSummary(None, None, None, final_cost, len(records))
    peak = max(field(r, "snr_db") for r in with_snr)
    first_peak = next(r for r in with_snr if field(r, "snr_db") == peak)
    return TraceSummary(
        peak_snr_db=peak,
        time_to_peak_s=field(first_peak, "wall_time_s"),
        final_snr_db=field(with_snr[-1], "snr_db"),
        final_cost=final_cost,
        n_records=len(records),
    )
