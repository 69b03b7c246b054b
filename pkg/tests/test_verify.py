"""
Tests for the verification harness, exploration and the matmul bound.
"""

import pytest

from flatrank.errors import ArgumentError, CapacityError
from flatrank.services import verify_service
from flatrank.services.verify_service import (
    bound_matmul,
    expected_difference_rank,
    expected_total_rank,
    explore_power,
    in_theorem_range,
    verify_cube,
    verify_many,
    verify_power,
    verify_square,
)


class TestClaimFormulas:
    """Test the stated closed forms."""

    def test_total(self):
        """2(q+2)^m."""
        assert expected_total_rank(3, 2) == 50
        assert expected_total_rank(5, 3) == 686

    def test_difference(self):
        """2(2q+3) for m = 2 and 6q^2+18q+14 for m = 3."""
        assert expected_difference_rank(5, 2) == 26
        assert expected_difference_rank(6, 3) == 338
        assert expected_difference_rank(3, 4) is None

    def test_theorem_range(self):
        """q >= 3 for squares and q >= 5 for cubes; nothing for m >= 4."""
        assert in_theorem_range(3, 2)
        assert not in_theorem_range(2, 2)
        assert not in_theorem_range(4, 3)
        assert in_theorem_range(5, 3)
        assert not in_theorem_range(9, 4)

    def test_anchor_table(self):
        """The anchors are the direct-computation cases."""
        assert verify_service.ANCHORS == {2: (3, 4), 3: (5,)}


class TestVerifySquare:
    """Test m = 2 reports."""

    def test_measured_ranks(self):
        """rank(T_q) = 2q^2+8q-4 falls short of 2(q+2)^2; S_q and additivity hold."""
        report = verify_power(5, 2)
        assert report.rank.rank == 86
        assert report.expected_rank == 98
        assert report.rows == report.cols == 108
        assert report.component_ranks == {"Tq_minus_1": 60, "Sq": 26}
        assert report.lo_bound == 43
        assert report.rank.certified

        assert not report.check("total_rank").passed
        assert report.check("total_rank").asserted
        assert report.check("difference_rank").passed
        assert report.check("additivity").passed
        assert report.check("image_containment").passed
        assert report.check("image_table").passed
        assert not report.passed

    def test_anchor_note(self):
        """q = 3 and q = 4 are the direct-computation anchors."""
        report = verify_power(3, 2, with_table=False)
        assert report.rank.rank == 38
        assert "induction anchor" in report.notes[0]

    def test_inductive_note(self):
        """q >= 5 is an inductive step."""
        report = verify_power(6, 2, with_table=False)
        assert report.rank.rank == 116
        assert "inductive step" in report.notes[0]

    def test_below_range_not_asserted(self):
        """q = 2 is computed and recorded but never asserted."""
        report = verify_power(2, 2)
        assert report.rank.rank == 20
        assert not report.in_theorem_range
        assert all(not check.asserted for check in report.checks)
        assert report.passed
        assert "below the theorem range" in report.notes[0]

    def test_warns_on_anchor_values(self, caplog):
        """verify_square warns for q = 3, 4."""
        with caplog.at_level("WARNING"):
            reports = verify_square([3], with_table=False)
        assert [report.q for report in reports] == [3]
        assert "anchors" in caplog.text

    def test_exact_mode(self):
        """--exact measures every rank over Q."""
        report = verify_power(3, 2, exact=True, with_table=False)
        assert report.rank.field_spec.kind == "rational"
        assert report.rank.rank == 38

    def test_q_below_two(self):
        """q = 1 has no restricted flattening."""
        with pytest.raises(ArgumentError):
            verify_power(1, 2)


class TestVerifyCube:
    """Test m = 3 reports."""

    def test_measured_ranks(self):
        """rank(T_5) = 492 and rank(S_5) = 218; both claims fail, additivity holds."""
        report = verify_power(5, 3, with_table=False)
        assert report.rank.rank == 492
        assert report.component_ranks == {"Tq_minus_1": 274, "Sq": 218}
        assert not report.check("total_rank").passed
        assert not report.check("difference_rank").passed
        assert report.check("additivity").passed
        assert report.check("image_containment").passed
        assert not report.passed

    def test_below_range(self, caplog):
        """q = 3 is below the cube range and only recorded."""
        with caplog.at_level("WARNING"):
            [report] = verify_cube([3], with_table=False)
        assert report.rank.rank == 128
        assert report.component_ranks == {"Tq_minus_1": 42, "Sq": 86}
        assert report.passed
        assert "outside the theorem range" in caplog.text


class TestVerifyMany:
    """Test the opt-in parallel runner."""

    async def test_ordered_by_q(self):
        """Results come back ordered by q whatever the completion order."""
        reports = await verify_many([4, 3, 2], 2, parallel=3, with_table=False)
        assert [report.q for report in reports] == [2, 3, 4]
        assert [report.rank.rank for report in reports] == [20, 38, 60]

    async def test_matches_serial(self):
        """Parallel and serial runs produce the same ranks and checks."""
        parallel = await verify_many([3, 4], 2, parallel=2, with_table=False)
        serial = verify_square([3, 4], with_table=False)
        for left, right in zip(parallel, serial, strict=True):
            assert left.rank == right.rank
            assert left.checks == right.checks

    async def test_rejects_zero_workers(self):
        """At least one worker."""
        with pytest.raises(ArgumentError):
            await verify_many([3], 2, parallel=0)


class TestExplore:
    """Test report-only exploration."""

    def test_square_matches_verify(self):
        """m = 2 exploration computes the same rank as verification."""
        [report] = explore_power([4], 2)
        assert report.rank.rank == 60
        assert report.rank.primes == [1073741789, 1000000007]
        assert report.check("prime_agreement").passed

    def test_fourth_power_is_report_only(self):
        """m = 4 records a conjectural target and asserts nothing."""
        [report] = explore_power([2], 4)
        assert report.rows == 3 * 3**4
        assert "conjectural target 512" in report.notes
        assert not report.in_theorem_range
        assert report.passed

    def test_deterministic(self):
        """The same inputs give the same rank."""
        first = explore_power([2], 4)[0].rank.rank
        second = explore_power([2], 4)[0].rank.rank
        assert first == second

    def test_below_range_flagged(self):
        """m = 3, q = 4 lies below the cube range."""
        [report] = explore_power([4], 3)
        assert report.rank.rank == 274
        assert not report.in_theorem_range
        assert report.passed

    def test_capacity(self, monkeypatch):
        """The memory guard names its override."""
        monkeypatch.setenv("FLATRANK_MAX_DIM", "100")
        with pytest.raises(CapacityError, match="FLATRANK_MAX_DIM"):
            explore_power([4], 3)

    def test_needs_m_two(self):
        """m = 1 is not explored."""
        with pytest.raises(ArgumentError):
            explore_power([3], 1)


class TestBoundMatmul:
    """Test random-restriction bounds for M_<n>."""

    def test_bound_within_ceiling(self):
        """The bound never exceeds rows / C(2p, p)."""
        report = bound_matmul(2, 1, trials=5, seed=0)
        assert report.subject == "matmul"
        assert report.rows == report.cols == 12
        assert report.check("bound_arithmetic").passed
        assert 1 <= report.lo_bound <= 6
        assert report.passed

    def test_deterministic(self):
        """Same seed, same bound."""
        assert bound_matmul(2, 1, 4, 11).lo_bound == bound_matmul(2, 1, 4, 11).lo_bound

    def test_domain(self):
        """n >= 2 and 2p+1 <= n^2."""
        with pytest.raises(ArgumentError):
            bound_matmul(1, 1, 1, 0)
        with pytest.raises(ArgumentError):
            bound_matmul(2, 2, 1, 0)
