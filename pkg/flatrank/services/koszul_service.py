"""
Koszul flattenings.

T^p_A : Lambda^p A (x) B* -> Lambda^(p+1) A (x) C sends X (x) beta to
sum_ijk T^ijk beta(b_j) (a_i ^ X) (x) c_k. Columns are labeled (X, J) and rows
(wedge, K), both ordered lexicographically on (wedge tuple, flat multi-index).
"""

import logging
import math
from collections import defaultdict
from collections.abc import Callable, Iterator
from typing import Literal, get_args

import numpy as np

from flatrank.core.matrix import SparseMatrix
from flatrank.core.tensor import (
    FactorMap,
    FactorShape,
    SparseTensor,
    apply_factor_map,
    factor_dim,
    flat_index,
    iter_indices,
)
from flatrank.errors import ArgumentError
from flatrank.schemas import FieldSpec, RankResult
from flatrank.services import generators
from flatrank.services.rank_service import rank_mod_p
from flatrank.utils.wedge import canonicalize, wedge_basis, wedge_positions

logger = logging.getLogger(__name__)

RestrictedVariant = Literal["Tq", "Tq_minus_1", "Sq"]
VARIANTS: tuple[str, ...] = get_args(RestrictedVariant)

# Entries of random restriction maps are drawn from [-RANDOM_ENTRY_BOUND, RANDOM_ENTRY_BOUND]
RANDOM_ENTRY_BOUND = 9


def _labels(wedges: tuple[tuple[int, ...], ...], shape: FactorShape) -> tuple[tuple, ...]:
    indices = list(iter_indices(shape))
    return tuple((wedge, index) for wedge in wedges for index in indices)


def _assemble(
    tensor: SparseTensor,
    dim_a: int,
    p: int,
    a_index: Callable[[tuple[int, ...]], int | None],
) -> SparseMatrix:
    """Shared Koszul assembly; a_index maps an A-factor index to a basis vector of A (None = zero)."""
    b_shape, c_shape = tensor.shape[1], tensor.shape[2]
    dim_b, dim_c = factor_dim(b_shape), factor_dim(c_shape)
    x_basis = wedge_basis(dim_a, p)
    y_positions = wedge_positions(dim_a, p + 1)

    totals: dict[tuple[int, int], int] = defaultdict(int)
    for (i_part, j_part, k_part), coef in tensor.entries.items():
        i = a_index(i_part)
        if i is None:
            continue
        j = flat_index(j_part, b_shape)
        k = flat_index(k_part, c_shape)
        for x_pos, wedge_x in enumerate(x_basis):
            wedge, sign = canonicalize((i, *wedge_x))
            if sign == 0:
                continue
            totals[(y_positions[wedge] * dim_c + k, x_pos * dim_b + j)] += sign * coef

    entries = {}
    for key, value in totals.items():
        reduced = tensor.field.reduce(value)
        if reduced != 0:
            entries[key] = reduced
    return SparseMatrix(
        n_rows=len(y_positions) * dim_c,
        n_cols=len(x_basis) * dim_b,
        entries=entries,
        row_labels=_labels(wedge_basis(dim_a, p + 1), c_shape),
        col_labels=_labels(x_basis, b_shape),
    )


def koszul_flattening(tensor: SparseTensor, p: int) -> SparseMatrix:
    """p-th Koszul flattening on the A factor; p=0 gives the ordinary B* -> A (x) C flattening."""
    dim_a = tensor.dims[0]
    if p < 0 or p + 1 > dim_a:
        raise ArgumentError(f"Koszul flattening needs 0 <= p < dim A = {dim_a}, got p={p}")
    a_shape = tensor.shape[0]
    return _assemble(tensor, dim_a, p, lambda index: flat_index(index, a_shape))


def variant_tensor(q: int, m: int, variant: str, field_spec: FieldSpec | None = None) -> SparseTensor:
    if variant not in VARIANTS:
        raise ArgumentError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
    if variant == "Tq":
        return generators.cw_power(q, m, field_spec)
    if variant == "Tq_minus_1":
        return generators.padded_cw_power(q, m, field_spec)
    return generators.difference_tensor(q, m, field_spec)


def restricted_flattening(q: int, m: int, variant: str = "Tq") -> SparseMatrix:
    """
    Matrix of (variant^1)_{A'} with phi_m applied inside the Koszul formula.

    Both sides are 3(q+1)^m. This route never builds the compressed tensor;
    restricted_flattening_via_map builds the same matrix the long way.
    """
    if q < 2:
        raise ArgumentError(f"restricted flattening needs q >= 2, got {q}")
    if m < 1:
        raise ArgumentError(f"restricted flattening needs m >= 1, got {m}")
    tensor = variant_tensor(q, m, variant)
    logger.debug(f"Restricted flattening {variant} q={q} m={m}: {tensor.nnz} tensor entries")
    return _assemble(tensor, generators.PHI_TARGET_DIM, 1, generators.phi_target)


def restricted_flattening_via_map(q: int, m: int, variant: str = "Tq") -> SparseMatrix:
    """Same matrix as restricted_flattening, built as koszul_flattening(phi (x) id (x) id (T), 1)."""
    tensor = variant_tensor(q, m, variant)
    return koszul_flattening(apply_factor_map(tensor, 0, generators.phi_map(q, m)), 1)


def lo_bound(rank: int, dim_a: int, p: int) -> int:
    """Border-rank lower bound ceil(rank / C(dim A - 1, p)), valid when dim A = 2p+1."""
    if dim_a != 2 * p + 1:
        raise ArgumentError(f"the bound needs dim A = 2p+1, got dim A={dim_a}, p={p}")
    if rank < 0:
        raise ArgumentError(f"rank must be non-negative, got {rank}")
    return -(-rank // math.comb(dim_a - 1, p))


# ==================== RANDOM RESTRICTIONS ====================


def coordinate_projection(source_dim: int, target_dim: int) -> FactorMap:
    """Keep the first target_dim basis vectors; the identity when the dims agree."""
    return FactorMap(source_dim, target_dim, {(i, i): 1 for i in range(target_dim)})


def random_factor_map(rng: np.random.Generator, source_dim: int, target_dim: int) -> FactorMap:
    values = rng.integers(-RANDOM_ENTRY_BOUND, RANDOM_ENTRY_BOUND + 1, size=(target_dim, source_dim))
    entries = {(int(r), int(c)): int(values[r, c]) for r, c in zip(*np.nonzero(values), strict=True)}
    return FactorMap(source_dim, target_dim, entries)


def restriction_bounds(
    tensor: SparseTensor, p: int, trials: int, seed: int, prime: int | None = None
) -> Iterator[tuple[RankResult, int]]:
    """Yield (rank result, bound) per trial.

    Trial 0 is the coordinate projection; later trials draw seeded random maps, so a
    longer run extends a shorter one with the same seed.
    """
    target = 2 * p + 1
    dim_a = tensor.dims[0]
    if p < 0:
        raise ArgumentError(f"p must be non-negative, got {p}")
    if dim_a < target:
        raise ArgumentError(f"dim A = {dim_a} is smaller than 2p+1 = {target}")
    if trials < 1:
        raise ArgumentError(f"need at least one trial, got {trials}")

    rng = np.random.default_rng(seed)
    for trial in range(trials):
        phi = coordinate_projection(dim_a, target) if trial == 0 else random_factor_map(rng, dim_a, target)
        matrix = koszul_flattening(apply_factor_map(tensor, 0, phi), p)
        result = rank_mod_p(matrix, prime)
        yield result, lo_bound(result.rank, target, p)


def random_restriction_bound(tensor: SparseTensor, p: int, trials: int, seed: int, prime: int | None = None) -> int:
    """Best Koszul lower bound on the border rank over seeded restrictions of A to dimension 2p+1."""
    best = max(bound for _, bound in restriction_bounds(tensor, p, trials, seed, prime))
    logger.info(f"Random restriction bound p={p} trials={trials} seed={seed}: {best}")
    return best
