"""
Randomized property suites.

Every suite draws its instances from a child of one numpy SeedSequence, so a
run is reproducible from (instances, seed) and suites do not share streams.
Each suite returns a single CheckOutcome.
"""

import logging
from collections.abc import Callable

import numpy as np

from flatrank.config import get_settings
from flatrank.core.matrix import SparseMatrix
from flatrank.core.tensor import (
    FactorMap,
    SparseTensor,
    add,
    apply_factor_map,
    kronecker,
    make_tensor,
)
from flatrank.schemas import CheckOutcome
from flatrank.services import generators
from flatrank.services.koszul_service import (
    VARIANTS,
    koszul_flattening,
    random_factor_map,
    restricted_flattening,
    restricted_flattening_via_map,
)
from flatrank.services.rank_service import rank_exact, rank_mod_p
from flatrank.utils.formats import dump_matrix, dump_tensor, load_matrix, load_tensor
from flatrank.utils.wedge import canonicalize, wedge_positions

logger = logging.getLogger(__name__)

DEFAULT_INSTANCES = 500

# Random block instances live in dimensions up to this size
MAX_BLOCK_DIM = 7
# Random integer entries are drawn from [-ENTRY_BOUND, ENTRY_BOUND]
ENTRY_BOUND = 5
# Small modulus used to show that rank mod p may drop below the rational rank
SMALL_PRIME = 3

ROUTE_Q_VALUES = (2, 3, 4)
ROUTE_M_VALUES = (1, 2)
EXPANSION_M_VALUES = (1, 2, 3)

Suite = Callable[[np.random.Generator, int], CheckOutcome]


# ==================== RANDOM OBJECTS ====================


def _unimodular(rng: np.random.Generator, n: int) -> np.ndarray:
    """Product of random elementary row operations row_a += +-row_b; determinant 1."""
    matrix = np.identity(n, dtype=np.int64)
    if n < 2:
        return matrix
    for _ in range(2 * n):
        a, b = rng.choice(n, size=2, replace=False)
        matrix[a] += int(rng.choice((-1, 1))) * matrix[b]
    return matrix


def _random_tensor(rng: np.random.Generator, dims: tuple[int, int, int], density: float = 0.3) -> SparseTensor:
    entries = []
    for i in range(dims[0]):
        for j in range(dims[1]):
            for k in range(dims[2]):
                if rng.random() < density:
                    entries.append(((i, j, k), int(rng.integers(1, 10)) * int(rng.choice((-1, 1)))))
    return make_tensor(dims, entries)


def _random_dims(rng: np.random.Generator, low: int = 1, high: int = 4) -> tuple[int, int, int]:
    a, b, c = (int(d) for d in rng.integers(low, high + 1, size=3))
    return (a, b, c)


def rank_sum_instance(
    rng: np.random.Generator, literal: bool = False
) -> tuple[SparseMatrix, SparseMatrix, int, int]:
    """
    Random f, g: V -> W with an expected rank(f) and dim X.

    Built in adapted bases V = U + Ker f and W = Im f + X + rest, then conjugated by
    random unimodular matrices. The default instance has g(U) = 0, g(Ker f) = X and
    X meeting Im f trivially. literal=True instead sets g(U) = X and g(Ker f) = 0.
    """
    v, w = (int(d) for d in rng.integers(1, MAX_BLOCK_DIM + 1, size=2))
    r = int(rng.integers(0, min(v, w) + 1))
    if literal:
        d = int(rng.integers(0, min(r, w - r) + 1))
    else:
        d = int(rng.integers(0, min(v - r, w - r) + 1))

    f0 = np.zeros((w, v), dtype=np.int64)
    f0[:r, :r] = np.identity(r, dtype=np.int64)
    g0 = np.zeros((w, v), dtype=np.int64)
    if d:
        width = r if literal else v - r
        block = rng.integers(-ENTRY_BOUND, ENTRY_BOUND + 1, size=(d, width))
        block[:, :d] = np.identity(d, dtype=np.int64)
        if literal:
            g0[r : r + d, :r] = block
        else:
            g0[r : r + d, r:] = block

    left, right = _unimodular(rng, w), _unimodular(rng, v)
    f = SparseMatrix.from_dense(left @ f0 @ right)
    g = SparseMatrix.from_dense(left @ g0 @ right)
    return f, g, r, d


# ==================== SUITES ====================


def check_rank_sum(rng: np.random.Generator, instances: int) -> CheckOutcome:
    failures = 0
    for _ in range(instances):
        f, g, r, d = rank_sum_instance(rng)
        if rank_exact(f).rank != r or rank_exact(f + g).rank != r + d:
            failures += 1
    return CheckOutcome(
        name="rank_sum",
        passed=failures == 0,
        expected=instances,
        observed=instances - failures,
        detail="rank(f+g) = rank f + dim X with g(U)=0, g(Ker f)=X, X meeting Im f trivially",
    )


def check_rank_sum_as_stated(rng: np.random.Generator, instances: int) -> CheckOutcome:
    """The hypotheses g(U) = X, V = U + Ker f; recorded only, they give rank(f+g) = rank f."""
    holds = 0
    for _ in range(instances):
        f, g, r, d = rank_sum_instance(rng, literal=True)
        if rank_exact(f + g).rank == r + d:
            holds += 1
    return CheckOutcome(
        name="rank_sum_as_stated",
        passed=holds == instances,
        asserted=False,
        expected=instances,
        observed=holds,
        detail="instances with g(U)=X and g(Ker f)=0 where the rank adds up",
    )


def _wedge_vector(a: int, b: int, c: int, n: int) -> dict[int, int]:
    wedge, sign = canonicalize((a, b))
    return {wedge_positions(3, 2)[wedge] * n + c: sign}


def _sum_vectors(*vectors: dict[int, int]) -> dict[int, int]:
    total: dict[int, int] = {}
    for vector in vectors:
        for key, value in vector.items():
            total[key] = total.get(key, 0) + value
    return {key: value for key, value in total.items() if value}


def check_independence(rng: np.random.Generator, instances: int) -> CheckOutcome:
    """x = e_i^e_j v_m + e_j^e_k v_n stays outside the span where y replaces x's two basis terms."""
    failures = 0
    for _ in range(instances):
        n = int(rng.integers(2, MAX_BLOCK_DIM + 1))
        i, j, k = (int(value) for value in rng.permutation(3))
        m_, n_ = (int(value) for value in rng.choice(n, size=2, replace=False))
        size = 3 * n
        x = _sum_vectors(_wedge_vector(i, j, m_, n), _wedge_vector(j, k, n_, n))
        y = _sum_vectors(_wedge_vector(i, j, n_, n), _wedge_vector(j, k, m_, n))
        removed = {*_wedge_vector(i, j, m_, n), *_wedge_vector(j, k, n_, n)}
        generators_ = [{pos: 1} for pos in range(size) if pos not in removed] + [y]
        span = rank_exact(SparseMatrix.from_columns(size, generators_)).rank
        extended = rank_exact(SparseMatrix.from_columns(size, [*generators_, x])).rank
        if extended != span + 1:
            failures += 1
    return CheckOutcome(
        name="independence",
        passed=failures == 0,
        expected=instances,
        observed=instances - failures,
    )


def check_kronecker_bilinearity(rng: np.random.Generator, instances: int) -> CheckOutcome:
    failures = 0
    for _ in range(instances):
        left_dims, right_dims = _random_dims(rng), _random_dims(rng)
        a, a2 = _random_tensor(rng, left_dims), _random_tensor(rng, left_dims)
        b, b2 = _random_tensor(rng, right_dims), _random_tensor(rng, right_dims)
        if kronecker(add(a, a2), b) != add(kronecker(a, b), kronecker(a2, b)):
            failures += 1
        elif kronecker(a, add(b, b2)) != add(kronecker(a, b), kronecker(a, b2)):
            failures += 1
    return CheckOutcome(
        name="kronecker_bilinearity",
        passed=failures == 0,
        expected=instances,
        observed=instances - failures,
    )


def check_kronecker_associativity(rng: np.random.Generator, instances: int) -> CheckOutcome:
    cw = generators.cw_tensor(3)
    passed = kronecker(kronecker(cw, cw), cw) == kronecker(cw, kronecker(cw, cw))
    return CheckOutcome(
        name="kronecker_associativity", passed=passed, detail="(T (x) T) (x) T = T (x) (T (x) T) for T_cw,3"
    )


def check_factor_map_linearity(rng: np.random.Generator, instances: int) -> CheckOutcome:
    """apply_factor_map is additive in the tensor and turns composition of maps into iteration."""
    failures = 0
    for _ in range(instances):
        dims = _random_dims(rng, 2, 4)
        factor = int(rng.integers(0, 3))
        middle, target = (int(d) for d in rng.integers(1, 4, size=2))
        phi = random_factor_map(rng, dims[factor], middle)
        psi = random_factor_map(rng, middle, target)
        a, a2 = _random_tensor(rng, dims), _random_tensor(rng, dims)
        additive = apply_factor_map(add(a, a2), factor, phi) == add(
            apply_factor_map(a, factor, phi), apply_factor_map(a2, factor, phi)
        )
        composed = apply_factor_map(apply_factor_map(a, factor, phi), factor, psi) == apply_factor_map(
            a, factor, psi.compose(phi)
        )
        identity = apply_factor_map(a, factor, FactorMap.identity(dims[factor])) == a
        if not (additive and composed and identity):
            failures += 1
    return CheckOutcome(
        name="factor_map_linearity",
        passed=failures == 0,
        expected=instances,
        observed=instances - failures,
    )


def check_difference_expansion(rng: np.random.Generator, instances: int) -> CheckOutcome:
    """S_q equals the sum of every T_cw,q-1 / W_q slot pattern except all-T."""
    mismatches = [
        f"q={q} m={m}"
        for m in EXPANSION_M_VALUES
        for q in ROUTE_Q_VALUES
        if generators.difference_tensor(q, m) != generators.difference_expansion(q, m)
    ]
    total = len(EXPANSION_M_VALUES) * len(ROUTE_Q_VALUES)
    return CheckOutcome(
        name="difference_expansion",
        passed=not mismatches,
        expected=total,
        observed=total - len(mismatches),
        detail=f"mismatches: {mismatches}" if mismatches else "",
    )


def check_route_equivalence(rng: np.random.Generator, instances: int) -> CheckOutcome:
    """The direct phi_m route and the explicit phi (x) id (x) id route give the same matrix."""
    mismatches = []
    for m in ROUTE_M_VALUES:
        for q in ROUTE_Q_VALUES:
            for variant in VARIANTS:
                if restricted_flattening(q, m, variant) != restricted_flattening_via_map(q, m, variant):
                    mismatches.append(f"{variant} q={q} m={m}")
    total = len(ROUTE_M_VALUES) * len(ROUTE_Q_VALUES) * len(VARIANTS)
    return CheckOutcome(
        name="route_equivalence",
        passed=not mismatches,
        expected=total,
        observed=total - len(mismatches),
        detail=f"mismatches: {mismatches}" if mismatches else "",
    )


def check_round_trips(rng: np.random.Generator, instances: int) -> CheckOutcome:
    tensors = [
        generators.cw_power(3, 2),
        generators.difference_tensor(3, 2),
        generators.matmul_tensor(2),
        *(_random_tensor(rng, (d, d, d)) for d in (int(v) for v in rng.integers(1, 5, size=min(instances, 20)))),
    ]
    matrices = [
        koszul_flattening(generators.cw_tensor(3), 1),
        restricted_flattening(3, 2, "Sq"),
        *(SparseMatrix.from_dense(rng.integers(-2, 3, size=(4, 5))) for _ in range(min(instances, 20))),
    ]
    failures = sum(1 for t in tensors if load_tensor(dump_tensor(t)) != t)
    failures += sum(1 for mat in matrices if load_matrix(dump_matrix(mat)) != mat)
    total = len(tensors) + len(matrices)
    return CheckOutcome(name="round_trips", passed=failures == 0, expected=total, observed=total - failures)


def check_certification_soundness(rng: np.random.Generator, instances: int) -> CheckOutcome:
    """rank mod p <= rank over Q on random low-rank integer matrices, for a large and a tiny prime."""
    failures = 0
    primes = (get_settings().default_prime, SMALL_PRIME)
    for _ in range(min(instances, 100)):
        rows, inner, cols = (int(d) for d in rng.integers(1, MAX_BLOCK_DIM + 1, size=3))
        dense = rng.integers(-ENTRY_BOUND, ENTRY_BOUND + 1, size=(rows, inner)) @ rng.integers(
            -ENTRY_BOUND, ENTRY_BOUND + 1, size=(inner, cols)
        )
        matrix = SparseMatrix.from_dense(dense)
        exact = rank_exact(matrix).rank
        if any(rank_mod_p(matrix, p).rank > exact for p in primes):
            failures += 1
    checked = min(instances, 100)
    return CheckOutcome(
        name="certification_soundness",
        passed=failures == 0,
        expected=checked,
        observed=checked - failures,
    )


SUITES: dict[str, Suite] = {
    "rank_sum": check_rank_sum,
    "rank_sum_as_stated": check_rank_sum_as_stated,
    "independence": check_independence,
    "kronecker_bilinearity": check_kronecker_bilinearity,
    "kronecker_associativity": check_kronecker_associativity,
    "factor_map_linearity": check_factor_map_linearity,
    "difference_expansion": check_difference_expansion,
    "route_equivalence": check_route_equivalence,
    "round_trips": check_round_trips,
    "certification_soundness": check_certification_soundness,
}


def run_property_suites(instances: int = DEFAULT_INSTANCES, seed: int | None = None) -> list[CheckOutcome]:
    """Run every suite; the seed defaults to FLATRANK_DEFAULT_SEED."""
    seed = get_settings().default_seed if seed is None else seed
    children = np.random.SeedSequence(seed).spawn(len(SUITES))
    outcomes = []
    for (name, suite), child in zip(SUITES.items(), children, strict=True):
        outcome = suite(np.random.default_rng(child), instances)
        logger.info(f"Property suite {name}: {'passed' if outcome.passed else 'FAILED'} {outcome.detail}".rstrip())
        outcomes.append(outcome)
    return outcomes
