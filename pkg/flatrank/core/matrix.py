"""Sparse exact matrices with optional labeled bases (flattening matrices)."""

from collections import defaultdict
from collections.abc import Hashable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from flatrank.errors import ArgumentError, BoundsError, ShapeError


@dataclass(frozen=True)
class SparseMatrix:
    """
    Immutable sparse matrix with integer entries keyed (row, col).

    Flattening matrices carry row and column labels (wedge tuple, multi-index);
    labels are bookkeeping only and take no part in equality.
    """

    n_rows: int
    n_cols: int
    entries: Mapping[tuple[int, int], int]
    row_labels: tuple[Hashable, ...] | None = field(default=None, compare=False)
    col_labels: tuple[Hashable, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n_rows < 0 or self.n_cols < 0:
            raise ShapeError(f"negative matrix shape {self.n_rows}x{self.n_cols}")
        for (row, col), coef in self.entries.items():
            if coef == 0:
                raise ArgumentError(f"zero entry stored at ({row}, {col})")
            if not (0 <= row < self.n_rows and 0 <= col < self.n_cols):
                raise BoundsError(f"entry ({row}, {col}) outside {self.n_rows}x{self.n_cols}")
        if self.row_labels is not None and len(self.row_labels) != self.n_rows:
            raise ShapeError(f"{len(self.row_labels)} row labels for {self.n_rows} rows")
        if self.col_labels is not None and len(self.col_labels) != self.n_cols:
            raise ShapeError(f"{len(self.col_labels)} column labels for {self.n_cols} columns")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    # === Label lookups ===

    @cached_property
    def _row_positions(self) -> dict[Hashable, int]:
        if self.row_labels is None:
            raise ArgumentError("matrix has no row labels")
        return {label: i for i, label in enumerate(self.row_labels)}

    @cached_property
    def _col_positions(self) -> dict[Hashable, int]:
        if self.col_labels is None:
            raise ArgumentError("matrix has no column labels")
        return {label: i for i, label in enumerate(self.col_labels)}

    def row_index(self, label: Hashable) -> int:
        try:
            return self._row_positions[label]
        except KeyError as e:
            raise BoundsError(f"unknown row label {label}") from e

    def col_index(self, label: Hashable) -> int:
        try:
            return self._col_positions[label]
        except KeyError as e:
            raise BoundsError(f"unknown column label {label}") from e

    # === Access ===

    @cached_property
    def _columns(self) -> dict[int, dict[int, int]]:
        grouped: dict[int, dict[int, int]] = defaultdict(dict)
        for (row, col), coef in self.entries.items():
            grouped[col][row] = coef
        return dict(grouped)

    @cached_property
    def _rows(self) -> dict[int, dict[int, int]]:
        grouped: dict[int, dict[int, int]] = defaultdict(dict)
        for (row, col), coef in self.entries.items():
            grouped[row][col] = coef
        return dict(grouped)

    def column(self, col: int) -> dict[int, int]:
        """Nonzero entries of one column as {row: coef}."""
        if not 0 <= col < self.n_cols:
            raise BoundsError(f"column {col} outside [0, {self.n_cols - 1}]")
        return dict(self._columns.get(col, {}))

    def sparse_rows(self) -> list[dict[int, int]]:
        """Nonzero rows as {col: coef} dicts, in row order."""
        return [dict(self._rows[row]) for row in sorted(self._rows)]

    def nonzero_rows(self) -> list[int]:
        return sorted(self._rows)

    def nonzero_cols(self) -> list[int]:
        return sorted(self._columns)

    def compressed_dense(self, dtype=np.int64, modulus: int | None = None) -> np.ndarray:
        """Dense array restricted to nonzero rows and columns (same rank), optionally reduced mod modulus."""
        rows = {r: i for i, r in enumerate(self.nonzero_rows())}
        cols = {c: i for i, c in enumerate(self.nonzero_cols())}
        dense = np.zeros((len(rows), len(cols)), dtype=dtype)
        for (row, col), coef in self.entries.items():
            dense[rows[row], cols[col]] = coef % modulus if modulus else coef
        return dense

    # === Algebra ===

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(
            self.n_cols,
            self.n_rows,
            {(col, row): coef for (row, col), coef in self.entries.items()},
            self.col_labels,
            self.row_labels,
        )

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch: {self.shape} vs {other.shape}")
        totals: dict[tuple[int, int], int] = defaultdict(int)
        for key, coef in (*self.entries.items(), *other.entries.items()):
            totals[key] += coef
        return SparseMatrix(
            self.n_rows,
            self.n_cols,
            {key: coef for key, coef in totals.items() if coef != 0},
            self.row_labels,
            self.col_labels,
        )

    @classmethod
    def from_columns(cls, n_rows: int, columns: Sequence[Mapping[int, int]]) -> "SparseMatrix":
        entries = {(row, col): coef for col, column in enumerate(columns) for row, coef in column.items() if coef}
        return cls(n_rows, len(columns), entries)

    @classmethod
    def from_dense(cls, array: Sequence[Sequence[int]] | np.ndarray) -> "SparseMatrix":
        dense = np.asarray(array, dtype=object)
        if dense.ndim != 2:
            raise ShapeError(f"expected a 2-d array, got {dense.ndim} dimensions")
        entries = {
            (row, col): int(dense[row, col])
            for row in range(dense.shape[0])
            for col in range(dense.shape[1])
            if dense[row, col] != 0
        }
        return cls(dense.shape[0], dense.shape[1], entries)


def hstack(left: SparseMatrix, right: SparseMatrix) -> SparseMatrix:
    if left.n_rows != right.n_rows:
        raise ShapeError(f"row count mismatch: {left.n_rows} vs {right.n_rows}")
    entries = dict(left.entries)
    entries.update({(row, col + left.n_cols): coef for (row, col), coef in right.entries.items()})
    return SparseMatrix(left.n_rows, left.n_cols + right.n_cols, entries)
