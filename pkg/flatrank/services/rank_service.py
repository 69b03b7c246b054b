"""
Exact rank of sparse integer matrices.

rank_mod_p uses dense numpy elimination over F_p when the compressed matrix is
small enough and sparse row elimination otherwise; rank_exact uses fraction-free
integer elimination. rank_certified combines them with the sandwich
rank_p <= rank_Q <= claimed_upper.
"""

import logging
import math
from fractions import Fraction

import numpy as np
from sympy import isprime

from flatrank.config import get_settings
from flatrank.core.matrix import SparseMatrix
from flatrank.errors import ArgumentError, CapacityError
from flatrank.schemas import FieldSpec, RankResult

logger = logging.getLogger(__name__)

# int64 products of two residues stay exact below this modulus
DENSE_PRIME_LIMIT = 2**31

SparseRow = dict[int, int]


# ==================== ELIMINATION KERNELS ====================


def _dense_rank_mod_p(matrix: np.ndarray, p: int) -> int:
    """Gaussian elimination over F_p; pivots are the first nonzero in column order."""
    a = np.mod(matrix.astype(np.int64), p)
    n_rows, n_cols = a.shape
    rank = 0
    for col in range(n_cols):
        if rank == n_rows:
            break
        candidates = np.flatnonzero(a[rank:, col])
        if candidates.size == 0:
            continue
        pivot = rank + int(candidates[0])
        if pivot != rank:
            a[[rank, pivot]] = a[[pivot, rank]]
        inverse = pow(int(a[rank, col]), -1, p)
        a[rank, col:] = (a[rank, col:] * inverse) % p
        below = rank + 1 + np.flatnonzero(a[rank + 1 :, col])
        if below.size:
            factors = a[below, col][:, None]
            a[below, col:] = (a[below, col:] - factors * a[rank, col:]) % p
        rank += 1
    return rank


def _normalize_mod_p(row: SparseRow, p: int) -> SparseRow:
    reduced = {col: value % p for col, value in row.items() if value % p}
    if not reduced:
        return reduced
    inverse = pow(reduced[min(reduced)], -1, p)
    return {col: value * inverse % p for col, value in reduced.items()}


def _primitive(row: SparseRow) -> SparseRow:
    """Divide an integer row by its content and make the leading entry positive."""
    row = {col: value for col, value in row.items() if value}
    if not row:
        return row
    content = math.gcd(*row.values())
    if row[min(row)] < 0:
        content = -content
    return {col: value // content for col, value in row.items()}


def _sparse_rank(rows: list[SparseRow], p: int | None) -> int:
    """
    Row echelon rank with sparse dict rows, sparsest rows first.

    p=None runs fraction-free over the integers: a row r is reduced against a
    pivot row v by b*r - a*v (b the pivot entry, a the row's entry) followed by
    content division, so the span over Q is preserved and entries stay small.
    """
    pivots: dict[int, SparseRow] = {}
    for source in sorted(rows, key=len):
        row = _normalize_mod_p(source, p) if p is not None else _primitive(source)
        while row:
            lead = min(row)
            pivot_row = pivots.get(lead)
            if pivot_row is None:
                pivots[lead] = row
                break
            if p is not None:
                factor = row[lead]
                merged = dict(row)
                for col, value in pivot_row.items():
                    merged[col] = (merged.get(col, 0) - factor * value) % p
                row = _normalize_mod_p(merged, p)
            else:
                a, b = row[lead], pivot_row[lead]
                merged = {col: b * value for col, value in row.items()}
                for col, value in pivot_row.items():
                    merged[col] = merged.get(col, 0) - a * value
                row = _primitive(merged)
    return len(pivots)


# ==================== PUBLIC API ====================


def _check_prime(p: int) -> None:
    if p <= 2 or not isprime(p):
        raise ArgumentError(f"modulus {p} is not an odd prime")


def _integer_entries(matrix: SparseMatrix) -> None:
    for key, value in matrix.entries.items():
        if isinstance(value, Fraction) or not isinstance(value, int | np.integer):
            raise ArgumentError(f"non-integer entry {value!r} at {key}")


def rank_mod_p(matrix: SparseMatrix, p: int | None = None) -> RankResult:
    """Rank over F_p; deterministic for a given matrix and prime."""
    settings = get_settings()
    p = settings.default_prime if p is None else p
    _check_prime(p)
    _integer_entries(matrix)

    n_rows, n_cols = len(matrix.nonzero_rows()), len(matrix.nonzero_cols())
    if max(n_rows, n_cols) <= settings.dense_max_dim and p < DENSE_PRIME_LIMIT:
        method = "dense-elimination"
        rank = _dense_rank_mod_p(matrix.compressed_dense(modulus=p), p) if matrix.nnz else 0
    else:
        method = "sparse-elimination"
        rank = _sparse_rank(matrix.sparse_rows(), p)

    logger.debug(f"rank mod {p} of {matrix.n_rows}x{matrix.n_cols} ({method}): {rank}")
    return RankResult(
        rank=rank,
        rows=matrix.n_rows,
        cols=matrix.n_cols,
        field_spec=FieldSpec.prime_field(p),
        method=method,
        certified=False,
        primes=[p],
    )


def rank_exact(matrix: SparseMatrix) -> RankResult:
    """Rank over Q by fraction-free elimination; always certified."""
    settings = get_settings()
    _integer_entries(matrix)
    if max(matrix.n_rows, matrix.n_cols) > settings.exact_max_dim:
        raise CapacityError(
            f"{matrix.n_rows}x{matrix.n_cols} exceeds the exact-mode cap {settings.exact_max_dim}; "
            "use multi-prime mode (rank_certified) or raise FLATRANK_EXACT_MAX_DIM"
        )
    rank = _sparse_rank(matrix.sparse_rows(), None)
    logger.debug(f"exact rank of {matrix.n_rows}x{matrix.n_cols}: {rank}")
    return RankResult(
        rank=rank,
        rows=matrix.n_rows,
        cols=matrix.n_cols,
        field_spec=FieldSpec.rational(),
        method="fraction-free",
        certified=True,
        justification="exact",
    )


def rank_certified(matrix: SparseMatrix, claimed_upper: int | None = None, prime: int | None = None) -> RankResult:
    """
    Rank with a certification trail.

    Args:
        matrix: Integer matrix.
        claimed_upper: A proven upper bound on the rational rank (e.g. 2x a border-rank upper
            bound). A mod-p rank reaching it certifies equality ("sandwich").
        prime: Primary modulus, the configured default when omitted.

    Returns:
        The final RankResult. Above the exact cap and without a sandwich hit, agreeing primes
        give justification "certified-probabilistic" with certified=False.
    """
    settings = get_settings()
    primary_prime = settings.default_prime if prime is None else prime
    secondary_prime = settings.fallback_prime if primary_prime != settings.fallback_prime else settings.default_prime

    primary = rank_mod_p(matrix, primary_prime)
    if claimed_upper is not None and primary.rank == claimed_upper:
        return primary.model_copy(update={"certified": True, "justification": "sandwich"})

    logger.info(f"rank mod {primary_prime} = {primary.rank}, escalating to mod {secondary_prime}")
    secondary = rank_mod_p(matrix, secondary_prime)
    primes = [primary_prime, secondary_prime]
    if claimed_upper is not None and secondary.rank == claimed_upper:
        return secondary.model_copy(update={"certified": True, "justification": "sandwich", "primes": primes})

    try:
        exact = rank_exact(matrix)
    except CapacityError as e:
        logger.warning(f"Exact rank unavailable ({e}); reporting multi-prime consensus")
        best = max(primary, secondary, key=lambda result: result.rank)
        tag = "certified-probabilistic" if primary.rank == secondary.rank else "prime-disagreement"
        return best.model_copy(update={"certified": False, "justification": tag, "primes": primes})

    if exact.rank != primary.rank:
        logger.warning(f"rank mod {primary_prime} = {primary.rank} below exact rank {exact.rank}")
    return exact.model_copy(update={"primes": primes})
