"""SNR/NMSE metrics and trace summaries."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hicu.arrays import MultiCoilKSpace
from hicu.errors import DimensionError
from hicu.metrics import SnrReport, TraceSummary, nmse, snr_db, summarize_trace
from hicu.solver import TraceRecord

from conftest import random_kspace


class TestSnr:
    def test_exact_estimate_is_infinite(self, rng):
        y = random_kspace(rng, 4, 4, 2)
        assert snr_db(y, y) == math.inf
        assert nmse(y, y) == 0.0

    def test_zero_estimate_is_zero_db(self, rng):
        y = random_kspace(rng, 4, 4, 2)
        assert snr_db(np.zeros_like(y), y) == pytest.approx(0.0, abs=1e-12)

    def test_ten_percent_error_is_twenty_db(self, rng):
        y = random_kspace(rng, 4, 4, 2)
        err = random_kspace(rng, 4, 4, 2)
        err *= 0.1 * np.linalg.norm(y) / np.linalg.norm(err)
        assert snr_db(y + err, y) == pytest.approx(20.0, abs=1e-9)

    def test_error_scale_covariance(self, rng):
        """Scaling the error by 10 costs exactly 20 dB."""
        y = random_kspace(rng, 4, 4, 2)
        e = 0.01 * random_kspace(rng, 4, 4, 2)
        assert snr_db(y + 10 * e, y) == pytest.approx(snr_db(y + e, y) - 20.0, abs=1e-9)

    def test_consistency_with_nmse(self, rng):
        y = random_kspace(rng, 5, 5, 2)
        x = y + 0.05 * random_kspace(rng, 5, 5, 2)
        assert abs(snr_db(x, y) + 10.0 * math.log10(nmse(x, y))) <= 1e-9

    def test_accepts_wrapped_kspace(self, rng):
        y = random_kspace(rng, 4, 4, 2)
        x = y + 0.1 * random_kspace(rng, 4, 4, 2)
        assert snr_db(MultiCoilKSpace(x), MultiCoilKSpace(y)) == pytest.approx(
            snr_db(x, y)
        )

    def test_shape_mismatch(self, rng):
        with pytest.raises(DimensionError):
            nmse(random_kspace(rng, 4, 4, 2), random_kspace(rng, 4, 4, 3))

    def test_zero_reference(self, rng):
        with pytest.raises(ValueError, match="zero energy"):
            nmse(random_kspace(rng, 4, 4, 2), np.zeros((4, 4, 2)))

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**16), scale=st.floats(1e-4, 1e3))
    def test_invariant_under_global_scaling(self, seed, scale):
        gen = np.random.default_rng(seed)
        y = random_kspace(gen, 4, 4, 1)
        x = y + 0.1 * random_kspace(gen, 4, 4, 1)
        assert snr_db(scale * x, scale * y) == pytest.approx(snr_db(x, y), rel=1e-9)


class TestSnrReport:
    def test_fields_are_consistent(self, rng):
        y = random_kspace(rng, 4, 4, 2)
        x = y + 0.1 * random_kspace(rng, 4, 4, 2)
        rep = SnrReport.compare(x, y, against="ref.ksp")
        assert rep.against == "ref.ksp"
        assert rep.snr_db == pytest.approx(-10.0 * math.log10(rep.nmse))
        assert rep.reference_norm == pytest.approx(np.linalg.norm(y))
        assert rep.error_norm == pytest.approx(np.linalg.norm(x - y))

    def test_exact_match_reports_inf_and_zero(self, rng):
        y = random_kspace(rng, 4, 4, 2)
        rep = SnrReport.compare(y, y)
        assert rep.snr_db == math.inf
        assert rep.nmse == 0.0
        assert rep.error_norm == 0.0


def records_from(snrs, times=None, costs=None):
    times = times or list(range(1, len(snrs) + 1))
    costs = costs or [100.0 - i for i in range(len(snrs))]
    return [
        TraceRecord(t, outer=i + 1, inner=1, cost=c, eta=0.1, snr_db=s)
        for i, (t, c, s) in enumerate(zip(times, costs, snrs))
    ]


class TestSummarizeTrace:
    def test_peak_and_final(self):
        summary = summarize_trace(records_from([10.0, 12.0, 11.0], times=[1, 2, 3]))
        assert summary.peak_snr_db == 12.0
        assert summary.time_to_peak_s == 2
        assert summary.final_snr_db == 11.0
        assert summary.n_records == 3

    def test_monotone_trace_peaks_at_the_end(self):
        summary = summarize_trace(records_from([1.0, 2.0, 3.0]))
        assert summary.peak_snr_db == summary.final_snr_db == 3.0

    def test_first_peak_wins_ties(self):
        summary = summarize_trace(records_from([5.0, 7.0, 7.0], times=[1, 2, 3]))
        assert summary.time_to_peak_s == 2

    def test_single_record(self):
        summary = summarize_trace(records_from([4.2], times=[0.5], costs=[10.0]))
        assert summary.peak_snr_db == summary.final_snr_db == 4.2
        assert summary.final_cost == 10.0
        assert summary.n_records == 1

    def test_missing_snr_yields_none(self):
        records = [TraceRecord(1.0, 1, 1, 50.0, 0.1, None)]
        summary = summarize_trace(records)
        assert summary.peak_snr_db is None
        assert summary.time_to_peak_s is None
        assert summary.final_snr_db is None
        assert summary.final_cost == 50.0

    def test_accepts_dict_rows(self):
        rows = [
            {"wall_time_s": 1.0, "outer": 1, "inner": 1, "cost": 5.0,
             "eta": 0.1, "snr_db": 3.0},
            {"wall_time_s": 2.0, "outer": 2, "inner": 1, "cost": 4.0,
             "eta": 0.1, "snr_db": None},
        ]
        summary = summarize_trace(rows)
        assert summary.peak_snr_db == 3.0
        assert summary.final_cost == 4.0
        assert summary.n_records == 2

    def test_empty_trace_is_an_error(self):
        with pytest.raises(ValueError, match="empty"):
            summarize_trace([])

    def test_result_type(self):
        assert isinstance(summarize_trace(records_from([1.0])), TraceSummary)
