"""
Concrete tensors and maps: W_j, the little Coppersmith-Winograd tensor T_cw,q,
its Kronecker powers, the difference tensor S_q, the compression phi_m onto a
3-dimensional A' and the matrix-multiplication tensor M_<n>.
"""

import logging
from dataclasses import dataclass
from itertools import product

from flatrank.core.tensor import (
    FactorMap,
    SparseTensor,
    embed,
    flat_index,
    kronecker,
    kronecker_power,
    make_tensor,
    subtract,
    tensor_sum,
)
from flatrank.errors import ArgumentError
from flatrank.schemas import FieldSpec

logger = logging.getLogger(__name__)

# Dimension of the compressed A' = span(e_0, e_1, e_2)
PHI_TARGET_DIM = 3


@dataclass(frozen=True)
class CwParams:
    q: int
    m: int

    def __post_init__(self):
        if self.q < 1 or self.m < 1:
            raise ArgumentError(f"need q >= 1 and m >= 1, got q={self.q}, m={self.m}")

    @property
    def subdim(self) -> int:
        return self.q + 1

    @property
    def side(self) -> int:
        """Side length 3(q+1)^m of the restricted flattening matrix."""
        return PHI_TARGET_DIM * self.subdim**self.m


@dataclass(frozen=True)
class PhiMap(FactorMap):
    """phi_m: A^(x)m -> A' sending a_0..0 to e_0 and a single 1 or 2 on zeros to e_1 or e_2."""

    q: int
    m: int


def w_tensor(q: int, j: int, field_spec: FieldSpec | None = None) -> SparseTensor:
    if not 1 <= j <= q:
        raise ArgumentError(f"W_j needs 1 <= j <= q, got j={j}, q={q}")
    entries = [((0, j, j), 1), ((j, 0, j), 1), ((j, j, 0), 1)]
    return make_tensor((q + 1,) * 3, entries, field_spec)


def cw_tensor(q: int, field_spec: FieldSpec | None = None) -> SparseTensor:
    if q < 1:
        raise ArgumentError(f"T_cw,q needs q >= 1, got {q}")
    return tensor_sum([w_tensor(q, j, field_spec) for j in range(1, q + 1)])


def cw_power(q: int, m: int, field_spec: FieldSpec | None = None) -> SparseTensor:
    """T_q = T_cw,q^(m), shape (q+1,)*m per factor."""
    return kronecker_power(cw_tensor(q, field_spec), m)


def padded_cw_power(q: int, m: int, field_spec: FieldSpec | None = None) -> SparseTensor:
    """T_cw,q-1^(m) with every slot padded to dimension q+1."""
    if q < 2:
        raise ArgumentError(f"T_cw,{q - 1} is undefined; need q >= 2")
    shape = ((q + 1,) * m,) * 3
    return embed(cw_power(q - 1, m, field_spec), shape)


def difference_tensor(q: int, m: int, field_spec: FieldSpec | None = None) -> SparseTensor:
    """S_q^(m) = T_cw,q^(m) - T_cw,q-1^(m), both in ambient (q+1)."""
    if q < 2:
        raise ArgumentError(f"the difference tensor needs q >= 2, got {q}")
    if m < 1:
        raise ArgumentError(f"the difference tensor needs m >= 1, got {m}")
    return subtract(cw_power(q, m, field_spec), padded_cw_power(q, m, field_spec))


def difference_expansion(q: int, m: int, field_spec: FieldSpec | None = None) -> SparseTensor:
    """
    S_q^(m) written as the sum over every pattern of T_cw,q-1 / W_q slots except all-T.

    For m=2 this is T(x)W + W(x)T + W(x)W; for m=3 it has seven terms.
    """
    if q < 2 or m < 1:
        raise ArgumentError(f"need q >= 2 and m >= 1, got q={q}, m={m}")
    previous = embed(cw_tensor(q - 1, field_spec), ((q + 1,),) * 3)
    newest = w_tensor(q, q, field_spec)
    terms = []
    for pattern in product((False, True), repeat=m):
        if not any(pattern):
            continue
        factors = [newest if use_w else previous for use_w in pattern]
        term = factors[0]
        for factor in factors[1:]:
            term = kronecker(term, factor)
        terms.append(term)
    logger.debug(f"Difference expansion q={q} m={m}: {len(terms)} terms")
    return tensor_sum(terms)


# === phi_m ===


def phi_target(index: tuple[int, ...]) -> int | None:
    """Image basis vector of a_index under phi_m, or None for the zero column."""
    nonzero = [value for value in index if value != 0]
    if not nonzero:
        return 0
    if len(nonzero) == 1 and nonzero[0] in (1, 2):
        return nonzero[0]
    return None


def phi_map(q: int, m: int) -> PhiMap:
    if q < 2:
        raise ArgumentError(f"phi_m needs the indices 0, 1, 2; got q={q}")
    if m < 1:
        raise ArgumentError(f"phi_m needs m >= 1, got {m}")
    shape = (q + 1,) * m
    entries = {(0, flat_index((0,) * m, shape)): 1}
    for slot in range(m):
        for value in (1, 2):
            index = [0] * m
            index[slot] = value
            entries[(value, flat_index(index, shape))] = 1
    return PhiMap((q + 1) ** m, PHI_TARGET_DIM, entries, q, m)


# === Matrix multiplication ===


def matmul_tensor(n: int, field_spec: FieldSpec | None = None) -> SparseTensor:
    """M_<n>: entry 1 at (i*n+j, j*n+k, k*n+i)."""
    if n < 1:
        raise ArgumentError(f"M_<n> needs n >= 1, got {n}")
    entries = [((i * n + j, j * n + k, k * n + i), 1) for i in range(n) for j in range(n) for k in range(n)]
    return make_tensor((n * n,) * 3, entries, field_spec)
