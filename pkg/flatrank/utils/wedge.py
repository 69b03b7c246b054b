"""Exterior-power bases and wedge canonicalization."""

from collections.abc import Mapping
from functools import lru_cache
from itertools import combinations
from types import MappingProxyType

from sympy.combinatorics import Permutation

from flatrank.errors import ArgumentError

WedgeIndex = tuple[int, ...]


@lru_cache(maxsize=256)
def wedge_basis(dim: int, p: int) -> tuple[WedgeIndex, ...]:
    """Basis of the p-th exterior power: strictly increasing p-tuples in lexicographic order."""
    if p < 0 or dim < 0:
        raise ArgumentError(f"need 0 <= p and 0 <= dim, got p={p}, dim={dim}")
    if p > dim:
        raise ArgumentError(f"p={p} exceeds dim={dim}")
    return tuple(combinations(range(dim), p))


@lru_cache(maxsize=256)
def wedge_positions(dim: int, p: int) -> Mapping[WedgeIndex, int]:
    """Read-only position of each basis wedge; the cached mapping is shared between callers."""
    return MappingProxyType({wedge: i for i, wedge in enumerate(wedge_basis(dim, p))})


@lru_cache(maxsize=65536)
def canonicalize(indices: tuple[int, ...]) -> tuple[WedgeIndex, int]:
    """
    Sort a wedge of basis vectors.

    Returns the sorted tuple and the sign of the sorting permutation; a repeated
    index makes the wedge vanish and yields sign 0.
    """
    ordered = tuple(sorted(indices))
    if len(set(indices)) < len(indices):
        return ordered, 0
    if len(indices) < 2:
        return ordered, 1
    order = sorted(range(len(indices)), key=indices.__getitem__)
    return ordered, -1 if Permutation(order).is_odd else 1
