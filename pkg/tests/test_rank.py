"""
Tests for the rank engines and certification.
"""

from fractions import Fraction

import numpy as np
import pytest

from flatrank.config import get_settings
from flatrank.core.matrix import SparseMatrix, hstack
from flatrank.errors import ArgumentError, BoundsError, CapacityError, ShapeError
from flatrank.services.koszul_service import restricted_flattening
from flatrank.services.rank_service import rank_certified, rank_exact, rank_mod_p


class TestSparseMatrix:
    """Test the sparse matrix value type."""

    def test_from_dense_drops_zeros(self):
        """Only nonzero entries are stored."""
        matrix = SparseMatrix.from_dense([[1, 0], [0, -2]])
        assert matrix.entries == {(0, 0): 1, (1, 1): -2}
        assert matrix.shape == (2, 2)

    def test_zero_entry_rejected(self):
        """Explicit zeros are refused."""
        with pytest.raises(ArgumentError):
            SparseMatrix(2, 2, {(0, 0): 0})

    def test_entry_out_of_bounds(self):
        """Entries must lie inside the declared shape."""
        with pytest.raises(BoundsError):
            SparseMatrix(2, 2, {(2, 0): 1})

    def test_label_count(self):
        """Label tuples match the shape."""
        with pytest.raises(ShapeError):
            SparseMatrix(2, 2, {}, row_labels=("a",))

    def test_labels_ignored_by_equality(self):
        """Equality compares shape and entries only."""
        labeled = SparseMatrix(1, 1, {(0, 0): 1}, row_labels=("r",), col_labels=("c",))
        assert labeled == SparseMatrix(1, 1, {(0, 0): 1})

    def test_transpose_and_add(self):
        """M + M^T on a 2x2 example."""
        matrix = SparseMatrix.from_dense([[1, 2], [0, 3]])
        total = matrix + matrix.transpose()
        assert total.compressed_dense().tolist() == [[2, 2], [2, 6]]

    def test_add_cancels(self):
        """Cancelled entries are dropped."""
        matrix = SparseMatrix.from_dense([[1, 2]])
        negated = SparseMatrix.from_dense([[-1, -2]])
        assert (matrix + negated).nnz == 0

    def test_hstack(self):
        """Columns of the right block are shifted."""
        stacked = hstack(SparseMatrix.from_dense([[1], [0]]), SparseMatrix.from_dense([[0], [5]]))
        assert stacked.compressed_dense().tolist() == [[1, 0], [0, 5]]
        with pytest.raises(ShapeError):
            hstack(SparseMatrix.from_dense([[1]]), SparseMatrix.from_dense([[1], [1]]))

    def test_compressed_dense(self):
        """Zero rows and columns are removed."""
        matrix = SparseMatrix(3, 3, {(2, 2): 4, (0, 2): 1})
        assert matrix.compressed_dense().tolist() == [[1], [4]]
        assert matrix.compressed_dense(modulus=3).tolist() == [[1], [1]]

    def test_unknown_label(self):
        """Unknown labels raise BoundsError."""
        matrix = restricted_flattening(2, 1)
        with pytest.raises(BoundsError):
            matrix.row_index(((0, 1), (9,)))


class TestRankModP:
    """Test rank over F_p."""

    def test_identity(self):
        """Full rank identity."""
        assert rank_mod_p(SparseMatrix.from_dense(np.identity(5, dtype=int))).rank == 5

    def test_dependent_rows(self):
        """Proportional rows have rank 1."""
        result = rank_mod_p(SparseMatrix.from_dense([[1, 2], [2, 4]]))
        assert result.rank == 1
        assert result.method == "dense-elimination"
        assert result.certified is False

    def test_small_prime_drops_rank(self):
        """diag(2, 3) has rank 1 mod 3 and 2 over Q."""
        matrix = SparseMatrix.from_dense([[2, 0], [0, 3]])
        assert rank_mod_p(matrix, 3).rank == 1
        assert rank_exact(matrix).rank == 2

    def test_zero_matrix(self):
        """No entries, rank 0."""
        assert rank_mod_p(SparseMatrix(4, 3, {})).rank == 0

    @pytest.mark.parametrize("p", [2, 4, 1, 21])
    def test_bad_modulus(self, p):
        """Only odd primes are accepted."""
        with pytest.raises(ArgumentError, match="not an odd prime"):
            rank_mod_p(SparseMatrix.from_dense([[1]]), p)

    def test_fraction_entry(self):
        """Entries must be integers."""
        with pytest.raises(ArgumentError, match="non-integer"):
            rank_mod_p(SparseMatrix(1, 1, {(0, 0): Fraction(1, 2)}))

    def test_sparse_path_matches_dense(self, monkeypatch):
        """Sparse elimination agrees with dense elimination."""
        matrix = restricted_flattening(3, 2)
        dense = rank_mod_p(matrix)
        monkeypatch.setenv("FLATRANK_DENSE_MAX_DIM", "1")
        get_settings.cache_clear()
        sparse = rank_mod_p(matrix)
        assert sparse.method == "sparse-elimination"
        assert sparse.rank == dense.rank == 38

    def test_deterministic(self):
        """The same matrix and prime give the same result."""
        matrix = restricted_flattening(3, 2, "Sq")
        assert rank_mod_p(matrix, 1000000007) == rank_mod_p(matrix, 1000000007)


class TestRankExact:
    """Test fraction-free rank over Q."""

    def test_rank_deficient(self):
        """A 3x3 matrix with a dependent row."""
        matrix = SparseMatrix.from_dense([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
        result = rank_exact(matrix)
        assert result.rank == 2
        assert result.certified is True
        assert result.justification == "exact"
        assert result.field_spec.kind == "rational"

    def test_large_entries(self):
        """Big integers are handled exactly."""
        big = 10**30
        matrix = SparseMatrix.from_dense(np.array([[big, big + 1], [big - 1, big]], dtype=object))
        assert rank_exact(matrix).rank == 2

    def test_capacity(self, monkeypatch):
        """Above the exact cap a CapacityError names the override."""
        monkeypatch.setenv("FLATRANK_EXACT_MAX_DIM", "10")
        with pytest.raises(CapacityError, match="FLATRANK_EXACT_MAX_DIM"):
            rank_exact(SparseMatrix(11, 11, {}))

    def test_mod_p_never_exceeds_exact(self):
        """rank_p <= rank_Q on random low-rank products."""
        rng = np.random.default_rng(3)
        for _ in range(30):
            dense = rng.integers(-4, 5, size=(6, 2)) @ rng.integers(-4, 5, size=(2, 5))
            matrix = SparseMatrix.from_dense(dense)
            exact = rank_exact(matrix).rank
            assert exact <= 2
            assert rank_mod_p(matrix, 3).rank <= exact
            assert rank_mod_p(matrix).rank == exact


class TestRankCertified:
    """Test the escalation ladder."""

    def test_sandwich(self):
        """A mod-p rank reaching the claimed upper bound certifies equality."""
        matrix = restricted_flattening(3, 1)
        result = rank_certified(matrix, claimed_upper=10)
        assert result.rank == 10
        assert result.certified is True
        assert result.justification == "sandwich"

    def test_exact_fallback(self):
        """Without a claim the ladder ends at exact rank with both primes recorded."""
        result = rank_certified(restricted_flattening(3, 2), prime=1000000007)
        assert result.rank == 38
        assert result.justification == "exact"
        assert result.primes == [1000000007, 1073741789]

    def test_probabilistic_above_cap(self, monkeypatch):
        """Agreeing primes above the exact cap are not a certificate."""
        monkeypatch.setenv("FLATRANK_EXACT_MAX_DIM", "5")
        result = rank_certified(restricted_flattening(2, 1))
        assert result.rank == 8
        assert result.certified is False
        assert result.justification == "certified-probabilistic"

    def test_prime_disagreement(self, monkeypatch):
        """Disagreeing primes report the larger rank."""
        monkeypatch.setenv("FLATRANK_EXACT_MAX_DIM", "1")
        result = rank_certified(SparseMatrix.from_dense([[3, 0], [0, 3]]), prime=3)
        assert result.rank == 2
        assert result.justification == "prime-disagreement"
        assert result.primes == [3, 1000000007]


SQUARE_CASES = [(q, 2, variant) for q in range(3, 7) for variant in ("Tq", "Sq")]
CUBE_CASES = [(5, 3, "Tq"), (5, 3, "Sq")]


class TestRankInvariants:
    """Rank facts that hold for every restricted flattening of the theorem range."""

    @pytest.mark.parametrize("q,m,variant", SQUARE_CASES + CUBE_CASES)
    def test_transpose(self, q, m, variant):
        """rank(M) = rank(M^T)."""
        matrix = restricted_flattening(q, m, variant)
        assert rank_mod_p(matrix).rank == rank_mod_p(matrix.transpose()).rank

    @pytest.mark.parametrize("q,m,variant", SQUARE_CASES + CUBE_CASES)
    def test_primes_agree(self, q, m, variant):
        """The default and fallback primes give the same rank."""
        settings = get_settings()
        matrix = restricted_flattening(q, m, variant)
        assert rank_mod_p(matrix, settings.default_prime).rank == rank_mod_p(matrix, settings.fallback_prime).rank
