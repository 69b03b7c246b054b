"""
Exact sparse order-3 tensors with Kronecker-composite factor indices.

Each factor carries a *shape*: the tuple of slot dimensions of its composite
index. A plain factor of dimension d has shape (d,); the m-th Kronecker power of
such a factor has shape (d,)*m. Entries are keyed by per-factor index tuples and
only flattened to integers at the matrix boundary.
"""

import math
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product

from flatrank.errors import ArgumentError, BoundsError, ShapeError
from flatrank.schemas import FieldSpec

Scalar = int | Fraction
FactorShape = tuple[int, ...]
TensorShape = tuple[FactorShape, FactorShape, FactorShape]
MultiIndex = tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]

ORDER = 3


def factor_dim(shape: FactorShape) -> int:
    return math.prod(shape)


def flat_index(index: Sequence[int], shape: FactorShape) -> int:
    """Row-major flattening of a composite index: the first slot is the most significant."""
    if len(index) != len(shape):
        raise ShapeError(f"index {tuple(index)} does not have {len(shape)} slots")
    value = 0
    for component, dim in zip(index, shape, strict=True):
        if not 0 <= component < dim:
            raise BoundsError(f"index component {component} outside [0, {dim - 1}]")
        value = value * dim + component
    return value


def unflat_index(value: int, shape: FactorShape) -> tuple[int, ...]:
    if not 0 <= value < factor_dim(shape):
        raise BoundsError(f"flat index {value} outside [0, {factor_dim(shape) - 1}]")
    components = []
    for dim in reversed(shape):
        value, component = divmod(value, dim)
        components.append(component)
    return tuple(reversed(components))


def iter_indices(shape: FactorShape) -> Iterable[tuple[int, ...]]:
    """All composite indices of a factor, in flat order."""
    return product(*(range(dim) for dim in shape))


@dataclass(frozen=True)
class SparseTensor:
    """Immutable order-3 tensor; no zero coefficient is ever stored."""

    shape: TensorShape
    entries: Mapping[MultiIndex, Scalar]
    field: FieldSpec

    def __post_init__(self):
        if len(self.shape) != ORDER:
            raise ShapeError(f"expected {ORDER} factors, got {len(self.shape)}")
        for key, coef in self.entries.items():
            if coef == 0:
                raise ArgumentError(f"zero coefficient stored at {key}")
            for component, factor_shape in zip(key, self.shape, strict=True):
                flat_index(component, factor_shape)

    @property
    def dims(self) -> tuple[int, int, int]:
        return (factor_dim(self.shape[0]), factor_dim(self.shape[1]), factor_dim(self.shape[2]))

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def __add__(self, other: "SparseTensor") -> "SparseTensor":
        return add(self, other)

    def __sub__(self, other: "SparseTensor") -> "SparseTensor":
        return subtract(self, other)


@dataclass(frozen=True)
class FactorMap:
    """Linear map between factor spaces; entries keyed (target row, source column)."""

    source_dim: int
    target_dim: int
    entries: Mapping[tuple[int, int], Scalar]

    def __post_init__(self):
        for (row, col), coef in self.entries.items():
            if coef == 0:
                raise ArgumentError(f"zero coefficient stored at ({row}, {col})")
            if not (0 <= row < self.target_dim and 0 <= col < self.source_dim):
                raise BoundsError(f"map entry ({row}, {col}) outside {self.target_dim}x{self.source_dim}")

    @cached_property
    def columns(self) -> dict[int, list[tuple[int, Scalar]]]:
        grouped: dict[int, list[tuple[int, Scalar]]] = defaultdict(list)
        for (row, col), coef in sorted(self.entries.items()):
            grouped[col].append((row, coef))
        return dict(grouped)

    def column(self, source: int) -> list[tuple[int, Scalar]]:
        return self.columns.get(source, [])

    def compose(self, inner: "FactorMap") -> "FactorMap":
        """self after inner."""
        if inner.target_dim != self.source_dim:
            raise ShapeError(f"cannot compose {self.source_dim}-dim source with {inner.target_dim}-dim target")
        totals: dict[tuple[int, int], Scalar] = defaultdict(int)
        for (middle, col), coef in inner.entries.items():
            for row, weight in self.column(middle):
                totals[(row, col)] += weight * coef
        return FactorMap(inner.source_dim, self.target_dim, {key: v for key, v in totals.items() if v != 0})

    @classmethod
    def identity(cls, dim: int) -> "FactorMap":
        return cls(dim, dim, {(i, i): 1 for i in range(dim)})

    @classmethod
    def zero(cls, source_dim: int, target_dim: int) -> "FactorMap":
        return cls(source_dim, target_dim, {})

    @classmethod
    def permutation(cls, perm: Sequence[int]) -> "FactorMap":
        """Basis relabeling a_i -> a_perm[i]."""
        if sorted(perm) != list(range(len(perm))):
            raise ArgumentError(f"{list(perm)} is not a permutation")
        return cls(len(perm), len(perm), {(target, source): 1 for source, target in enumerate(perm)})


# ==================== CONSTRUCTION ====================


def _normalize_shape(dims: Sequence[int | Sequence[int]]) -> TensorShape:
    if len(dims) != ORDER:
        raise ShapeError(f"expected {ORDER} factor dims, got {len(dims)}")
    shape = tuple((d,) if isinstance(d, int) else tuple(d) for d in dims)
    if any(dim < 1 for factor in shape for dim in factor):
        raise ArgumentError(f"dimensions must be positive: {shape}")
    return shape  # type: ignore[return-value]


def _normalize_key(key: Sequence[int | Sequence[int]]) -> MultiIndex:
    if len(key) != ORDER:
        raise ShapeError(f"index {key} does not have {ORDER} parts")
    return tuple((k,) if isinstance(k, int) else tuple(k) for k in key)  # type: ignore[return-value]


def _collect(
    shape: TensorShape, items: Iterable[tuple[MultiIndex, Scalar]], field_spec: FieldSpec
) -> SparseTensor:
    totals: dict[MultiIndex, Scalar] = defaultdict(int)
    for key, coef in items:
        totals[key] += coef
    entries = {}
    for key, coef in totals.items():
        reduced = field_spec.reduce(coef)
        if reduced != 0:
            entries[key] = reduced
    return SparseTensor(shape, entries, field_spec)


def make_tensor(
    dims: Sequence[int | Sequence[int]],
    entries: Iterable[tuple[Sequence[int | Sequence[int]], Scalar]],
    field_spec: FieldSpec | None = None,
) -> SparseTensor:
    """Build a tensor from (index, coefficient) pairs; duplicates are summed and zeros dropped.

    Args:
        dims: Per-factor dimension (an int) or slot shape (a tuple).
        entries: Pairs of index and coefficient. Plain ints are accepted for single-slot factors.
        field_spec: Coefficient field, the default prime field when omitted.
    """
    shape = _normalize_shape(dims)
    field_spec = field_spec or FieldSpec.prime_field()
    normalized = []
    for key, coef in entries:
        index = _normalize_key(key)
        for part, factor_shape in zip(index, shape, strict=True):
            flat_index(part, factor_shape)
        normalized.append((index, coef))
    return _collect(shape, normalized, field_spec)


def empty_like(tensor: SparseTensor) -> SparseTensor:
    return SparseTensor(tensor.shape, {}, tensor.field)


# ==================== LINEAR OPERATIONS ====================


def _check_compatible(left: SparseTensor, right: SparseTensor) -> None:
    if left.shape != right.shape:
        raise ShapeError(f"shape mismatch: {left.shape} vs {right.shape}")
    if left.field != right.field:
        raise ShapeError(f"field mismatch: {left.field.label} vs {right.field.label}")


def add(left: SparseTensor, right: SparseTensor) -> SparseTensor:
    _check_compatible(left, right)
    return _collect(left.shape, [*left.entries.items(), *right.entries.items()], left.field)


def subtract(left: SparseTensor, right: SparseTensor) -> SparseTensor:
    _check_compatible(left, right)
    negated = ((key, -coef) for key, coef in right.entries.items())
    return _collect(left.shape, [*left.entries.items(), *negated], left.field)


def tensor_sum(tensors: Sequence[SparseTensor]) -> SparseTensor:
    if not tensors:
        raise ArgumentError("cannot sum an empty list of tensors")
    total = tensors[0]
    for tensor in tensors[1:]:
        total = add(total, tensor)
    return total


def embed(tensor: SparseTensor, shape: Sequence[Sequence[int]]) -> SparseTensor:
    """Zero-pad into larger slot dimensions; indices are unchanged."""
    target = _normalize_shape(shape)
    for old, new in zip(tensor.shape, target, strict=True):
        if len(old) != len(new) or any(o > n for o, n in zip(old, new, strict=True)):
            raise ShapeError(f"cannot embed shape {tensor.shape} into {target}")
    return SparseTensor(target, dict(tensor.entries), tensor.field)


# ==================== KRONECKER ====================


def kronecker(left: SparseTensor, right: SparseTensor) -> SparseTensor:
    """External tensor product; composite indices concatenate per factor, left tuple first."""
    if left.field != right.field:
        raise ShapeError(f"field mismatch: {left.field.label} vs {right.field.label}")
    shape = tuple(a + b for a, b in zip(left.shape, right.shape, strict=True))
    entries: dict[MultiIndex, Scalar] = {}
    for (i, j, k), coef in left.entries.items():
        for (i2, j2, k2), coef2 in right.entries.items():
            value = left.field.reduce(coef * coef2)
            if value != 0:
                entries[(i + i2, j + j2, k + k2)] = value
    return SparseTensor(shape, entries, left.field)  # type: ignore[arg-type]


def kronecker_power(tensor: SparseTensor, m: int) -> SparseTensor:
    if m < 1:
        raise ArgumentError(f"Kronecker power needs m >= 1, got {m}")
    result = tensor
    for _ in range(m - 1):
        result = kronecker(result, tensor)
    return result


# ==================== FACTOR MAPS ====================


def apply_factor_map(tensor: SparseTensor, factor: int, phi: FactorMap) -> SparseTensor:
    """Apply phi to one factor (phi (x) id (x) id for factor 0); the factor becomes a single slot."""
    if factor not in range(ORDER):
        raise ArgumentError(f"factor must be 0, 1 or 2, got {factor}")
    source_shape = tensor.shape[factor]
    if phi.source_dim != factor_dim(source_shape):
        raise ShapeError(f"map source dim {phi.source_dim} != factor dim {factor_dim(source_shape)}")

    items: list[tuple[MultiIndex, Scalar]] = []
    for key, coef in tensor.entries.items():
        for target, weight in phi.column(flat_index(key[factor], source_shape)):
            parts = list(key)
            parts[factor] = (target,)
            items.append((tuple(parts), coef * weight))  # type: ignore[arg-type]

    shape = list(tensor.shape)
    shape[factor] = (phi.target_dim,)
    return _collect(tuple(shape), items, tensor.field)  # type: ignore[arg-type]
