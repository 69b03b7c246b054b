"""
Tests for the pointwise image tables of the restricted difference flattening.
"""

import pytest

from flatrank.errors import ArgumentError
from flatrank.schemas import ImageTableEntry, ImageTerm
from flatrank.services import image_tables


def _find(entries, family, b_index):
    return next(entry for entry in entries if entry.family == family and entry.b_index == b_index)


class TestImageEntrySchema:
    """Test the table entry model."""

    def test_at_most_two_terms(self):
        """Three summands are refused."""
        term = ImageTerm(wedge=(0, 1), c_index=(1, 1))
        with pytest.raises(ValueError, match="at most two terms"):
            ImageTableEntry(family="(1)", block="e0", x=0, b_index=(1, 1), expected=[term, term, term])

    def test_unit_coefficients(self):
        """Coefficients are +-1."""
        with pytest.raises(ValueError):
            ImageTableEntry(
                family="(1)", block="e0", x=0, b_index=(1, 1), expected=[ImageTerm(wedge=(0, 1), c_index=(1,), coef=2)]
            )


class TestSquareTable:
    """Test items (1)-(20) for m = 2."""

    @pytest.mark.parametrize("q", [3, 4, 5, 8])
    def test_block_sizes(self, q):
        """Blocks of (q+1), q, (q+1), q and 4 inputs."""
        entries = image_tables.square_table(q)
        assert len(entries) == 4 * q + 6
        counts = {}
        for entry in entries:
            counts[entry.block] = counts.get(entry.block, 0) + 1
        assert counts == image_tables.square_block_counts(q)

    def test_item_two(self):
        """Item (2): e_1 (x) b_q2 -> e_0^e_1 c_q2 + e_2^e_1 c_q0."""
        entry = _find(image_tables.square_table(6), "(2)", (6, 2))
        assert entry.x == 1
        assert [(term.wedge, term.c_index) for term in entry.expected] == [((0, 1), (6, 2)), ((2, 1), (6, 0))]

    def test_item_eight(self):
        """Item (8): e_1 (x) b_0q -> e_2^e_1 c_2q."""
        entry = _find(image_tables.square_table(6), "(8)", (0, 6))
        assert [(term.wedge, term.c_index) for term in entry.expected] == [((2, 1), (2, 6))]

    def test_below_range(self):
        """The table starts at q = 3."""
        with pytest.raises(ArgumentError):
            image_tables.square_table(2)

    def test_verdict_q5(self, square_difference_q5):
        """Every item matches, the items are independent and they span the column space."""
        _, verdict = image_tables.pointwise_image_table(5, 2, square_difference_q5)
        assert verdict.count == 26
        assert verdict.matched == 26
        assert verdict.mismatched == []
        assert verdict.listed_rank == verdict.column_space_rank == verdict.combined_rank == 26
        assert verdict.independent and verdict.spans and verdict.counts_match
        assert verdict.passed

    def test_verdict_q8(self):
        """The same holds at q = 8."""
        _, verdict = image_tables.pointwise_image_table(8, 2)
        assert verdict.passed
        assert verdict.count == 38

    def test_expected_vector_canonicalizes(self, square_difference_q5):
        """e_2^e_1 is stored as -(e_1^e_2)."""
        entry = _find(image_tables.square_table(5), "(4)", (5, 0))
        vector = image_tables.expected_vector(entry, square_difference_q5)
        assert vector == {square_difference_q5.row_index(((1, 2), (5, 2))): -1}
        assert vector == image_tables.actual_vector(entry, square_difference_q5)


class TestCubeTable:
    """Test families A, B and C for m = 3."""

    @pytest.mark.parametrize("q", [5, 6, 9])
    def test_total_count(self, q):
        """2(3q^2+3q+1) + 12(q+1) = 6q^2 + 18q + 14."""
        entries = image_tables.cube_table(q)
        assert len(entries) == 6 * q**2 + 18 * q + 14
        assert sum(image_tables.cube_block_counts(q).values()) == len(entries)

    def test_family_sizes(self):
        """A_1 has (q+1)^2, A_2 q(q+1) and A_3 q^2 inputs; every C family q+1."""
        q = 5
        counts = {}
        for entry in image_tables.cube_table(q):
            counts[entry.family] = counts.get(entry.family, 0) + 1
        assert counts["A1"] == 36
        assert counts["A2"] == 30
        assert counts["B3"] == 25
        c_families = {name: size for name, size in counts.items() if name.startswith("C")}
        assert len(c_families) == 12
        assert set(c_families.values()) == {q + 1}
        assert image_tables.cube_family_counts(q)["A1"] == 36

    def test_orderings_overlap(self):
        """All six orderings are used, so (q, 1, 2) sits in two C families."""
        families = [entry.family for entry in image_tables.cube_table(5) if entry.b_index == (5, 1, 2)]
        assert sorted(family for family in families if family.startswith("C")) == ["C1[123]", "C2[132]"]

    def test_below_range(self):
        """The table starts at q = 5."""
        with pytest.raises(ArgumentError):
            image_tables.cube_table(4)

    def test_unknown_power(self):
        """Tables exist for m = 2 and m = 3 only."""
        with pytest.raises(ArgumentError):
            image_tables.table_for(5, 4)


class TestCubeImagesAgainstColumns:
    """Compare individual m = 3 images with the computed S_6 columns."""

    @pytest.fixture
    def entries(self):
        return image_tables.cube_table(6)

    def _matches(self, entry, matrix):
        return image_tables.expected_vector(entry, matrix) == image_tables.actual_vector(entry, matrix)

    def test_single_term_a1(self, entries, cube_difference_q6):
        """A_1 with free values (3, 3) is e_0^e_1 c_J."""
        assert self._matches(_find(entries, "A1", (6, 3, 3)), cube_difference_q6)

    def test_two_term_a1(self, entries, cube_difference_q6):
        """A_1 with free values (2, 3) picks up e_2^e_1 c_J[2->0]."""
        assert self._matches(_find(entries, "A1", (6, 2, 3)), cube_difference_q6)

    def test_a1_two_twos_mismatch(self, entries, cube_difference_q6):
        """Two slots equal to 2 give three summands; the table lists two."""
        entry = _find(entries, "A1", (6, 2, 2))
        assert not self._matches(entry, cube_difference_q6)
        assert len(image_tables.actual_vector(entry, cube_difference_q6)) == 3

    def test_a1_two_zeros_mismatch(self, entries, cube_difference_q6):
        """Two zeros in J give a zero column."""
        entry = _find(entries, "A1", (6, 0, 0))
        assert image_tables.actual_vector(entry, cube_difference_q6) == {}
        assert not self._matches(entry, cube_difference_q6)

    def test_c_family(self, entries, cube_difference_q6):
        """C with j_m = t: e_0 (x) b_J -> e_t^e_0 c_J<0>."""
        entry = _find(entries, "C1[123]", (6, 1, 4))
        assert [(term.wedge, term.c_index) for term in entry.expected] == [((1, 0), (6, 0, 4))]
        assert self._matches(entry, cube_difference_q6)

    def test_verdict(self, cube_difference_q6):
        """The count is right but the m = 3 table does not pass."""
        _, verdict = image_tables.pointwise_image_table(6, 3, cube_difference_q6)
        assert verdict.count == verdict.expected_count == 338
        assert verdict.counts_match
        assert verdict.mismatched
        assert not verdict.passed
