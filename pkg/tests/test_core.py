"""Randomness contract, summary statistics, and domain-type invariants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from demimart.core import (
    ProcessEnsemble,
    ProcessPath,
    RunningStats,
    SummaryStats,
    VerificationReport,
    derive_stream,
    summarize,
)


class TestDeriveStream:
    def test_same_key_reproduces_bits(self):
        a = derive_stream(42, 0).bytes(64)
        b = derive_stream(42, 0).bytes(64)
        assert a == b

    def test_distinct_chunks_diverge_immediately(self):
        """First 64 output bits differ between chunk 0 and chunk 1."""
        a = derive_stream(42, 0).bytes(8)
        b = derive_stream(42, 1).bytes(8)
        assert a != b

    def test_zero_seed_is_not_special(self):
        g = derive_stream(0, 0)
        assert g.random() != derive_stream(0, 1).random()

    def test_negative_chunk_rejected(self):
        with pytest.raises(ValueError):
            derive_stream(1, -1)

    def test_distinct_seeds_diverge(self):
        assert derive_stream(1, 0).bytes(8) != derive_stream(2, 0).bytes(8)


class TestSummarize:
    def test_constant_sample(self):
        s = summarize([1.0, 1.0, 1.0])
        assert s.mean == 1.0
        assert s.stderr == 0.0
        assert s.count == 3

    def test_two_point_sample(self):
        # sd = sqrt(2), stderr = sqrt(2)/sqrt(2) = 1
        s = summarize([0.0, 2.0])
        assert s.mean == pytest.approx(1.0)
        assert s.stderr == pytest.approx(1.0)

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError, match="empty sample"):
            summarize([])

    def test_single_point_gets_inf_sentinel(self):
        s = summarize([3.5])
        assert s.mean == 3.5
        assert math.isinf(s.stderr)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            summarize([1.0, math.nan])


class TestRunningStats:
    @given(
        st.lists(
            st.floats(min_value=-100, max_value=100, allow_nan=False),
            min_size=2,
            max_size=60,
        ),
        st.integers(min_value=1, max_value=10),
    )
    @settings(max_examples=200, deadline=None)
    def test_chunked_matches_whole(self, xs, cut):
        """Merging chunk statistics reproduces the one-shot summary."""
        arr = np.array(xs)
        k = cut % len(arr)
        a, b = RunningStats(), RunningStats()
        a.update(arr[:k])
        b.update(arr[k:])
        a.merge(b)
        whole = summarize(arr)
        got = a.to_summary()
        assert got.count == whole.count
        assert got.mean == pytest.approx(whole.mean, rel=1e-12, abs=1e-12)
        if math.isfinite(whole.stderr):
            assert got.stderr == pytest.approx(whole.stderr, rel=1e-9, abs=1e-12)

    def test_merge_order_independent(self):
        rng = np.random.default_rng(0)
        chunks = [rng.normal(size=50) for _ in range(4)]
        fwd, rev = RunningStats(), RunningStats()
        for c in chunks:
            fwd.update(c)
        for c in reversed(chunks):
            rev.update(c)
        assert fwd.to_summary().mean == pytest.approx(rev.to_summary().mean, rel=1e-12)
        assert fwd.to_summary().stderr == pytest.approx(rev.to_summary().stderr, rel=1e-12)


class TestDomainTypes:
    def test_path_requires_finite_values(self):
        with pytest.raises(ValueError):
            ProcessPath(np.array([1.0, np.inf]))

    def test_path_increments_prepend_zero(self):
        p = ProcessPath(np.array([2.0, 5.0, 4.0]))
        assert p.increments.tolist() == [2.0, 3.0, -1.0]
        assert p.horizon == 3

    def test_ensemble_uniform_horizon(self):
        ens = ProcessEnsemble(np.zeros((3, 4)), seed=1, generator_id="x")
        assert ens.n_paths == 3
        assert ens.horizon == 4
        assert all(p.horizon == 4 for p in ens.paths)

    def test_ensemble_rejects_empty(self):
        with pytest.raises(ValueError):
            ProcessEnsemble(np.zeros((0, 4)), seed=1, generator_id="x")

    def test_exact_report_requires_zero_stderr(self):
        good = SummaryStats(mean=0.0, stderr=0.0, count=8)
        VerificationReport("T", good, 0.0, "<=", None, "PASS", exact=True)
        bad = SummaryStats(mean=0.0, stderr=0.5, count=8)
        with pytest.raises(ValueError):
            VerificationReport("T", bad, 0.0, "<=", None, "PASS", exact=True)

    def test_exact_report_cannot_be_inconclusive(self):
        s = SummaryStats(mean=0.0, stderr=0.0, count=8)
        with pytest.raises(ValueError):
            VerificationReport("T", s, 0.0, "<=", None, "INCONCLUSIVE", exact=True)
