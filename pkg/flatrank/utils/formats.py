"""
Text interchange formats.

Tensor file:
    tns v1 order=3 subdim=<d> power=<m>
    i1 .. im | j1 .. jm | k1 .. km | coef

Matrix file:
    mtx v1 rows=<R> cols=<C>
    row col coef

Entry lines are written in sorted key order so a dump is byte-stable. Labels of
flattening matrices are not serialized.
"""

import logging
from collections.abc import Iterable
from fractions import Fraction
from pathlib import Path

from flatrank.core.matrix import SparseMatrix
from flatrank.core.tensor import ORDER, SparseTensor
from flatrank.errors import FlatrankError, FormatError, ParseError
from flatrank.schemas import FieldSpec

logger = logging.getLogger(__name__)

TENSOR_MAGIC = "tns"
MATRIX_MAGIC = "mtx"
FORMAT_VERSION = "v1"


def _coefficient(value) -> int:
    if isinstance(value, Fraction):
        if value.denominator != 1:
            raise FormatError(f"non-integer coefficient {value} cannot be written")
        return value.numerator
    return int(value)


def _parse_header(line: str, magic: str, keys: tuple[str, ...]) -> dict[str, int]:
    tokens = line.split()
    if len(tokens) < 2 or tokens[0] != magic:
        raise ParseError(f"expected a '{magic} {FORMAT_VERSION}' header, got {line.strip()!r}", 1)
    if tokens[1] != FORMAT_VERSION:
        raise ParseError(f"unsupported version {tokens[1]!r}", 1)
    values: dict[str, int] = {}
    for token in tokens[2:]:
        key, sep, raw = token.partition("=")
        if not sep or key not in keys:
            raise ParseError(f"unexpected header field {token!r}", 1)
        try:
            values[key] = int(raw)
        except ValueError as e:
            raise ParseError(f"header field {key} is not an integer: {raw!r}", 1) from e
    missing = [key for key in keys if key not in values]
    if missing:
        raise ParseError(f"header is missing {', '.join(missing)}", 1)
    return values


def _body(lines: list[str]) -> Iterable[tuple[int, str]]:
    """Non-blank lines after the header, with 1-based line numbers."""
    for number, line in enumerate(lines[1:], start=2):
        if line.strip():
            yield number, line


def _int(token: str, number: int, what: str) -> int:
    try:
        return int(token)
    except ValueError as e:
        raise ParseError(f"{what} {token!r} is not an integer", number) from e


# ==================== TENSORS ====================


def dump_tensor(tensor: SparseTensor) -> str:
    """Serialize a tensor whose three factors share one uniform slot shape (d,)*m."""
    shape = tensor.shape[0]
    if any(factor != shape for factor in tensor.shape) or len(set(shape)) != 1:
        raise FormatError(f"the tensor format needs a uniform shape (d,)*m per factor, got {tensor.shape}")
    lines = [f"{TENSOR_MAGIC} {FORMAT_VERSION} order={ORDER} subdim={shape[0]} power={len(shape)}"]
    for key in sorted(tensor.entries):
        parts = [" ".join(str(component) for component in part) for part in key]
        lines.append(f"{' | '.join(parts)} | {_coefficient(tensor.entries[key])}")
    return "\n".join(lines) + "\n"


def load_tensor(text: str, field_spec: FieldSpec | None = None) -> SparseTensor:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty tensor file", 1)
    header = _parse_header(lines[0], TENSOR_MAGIC, ("order", "subdim", "power"))
    if header["order"] != ORDER:
        raise ParseError(f"only order {ORDER} tensors are supported, got order={header['order']}", 1)
    subdim, power = header["subdim"], header["power"]
    if subdim < 1 or power < 1:
        raise ParseError(f"subdim and power must be positive, got subdim={subdim}, power={power}", 1)

    field_spec = field_spec or FieldSpec.prime_field()
    entries: dict = {}
    for number, line in _body(lines):
        parts = [part.split() for part in line.split("|")]
        if len(parts) != ORDER + 1:
            raise ParseError(f"expected {ORDER} index groups and a coefficient separated by '|'", number)
        key = []
        for part in parts[:ORDER]:
            if len(part) != power:
                raise ParseError(f"index group {' '.join(part)!r} does not have {power} components", number)
            index = tuple(_int(token, number, "index") for token in part)
            if any(not 0 <= component < subdim for component in index):
                raise ParseError(f"index {index} outside [0, {subdim - 1}]", number)
            key.append(index)
        if len(parts[ORDER]) != 1:
            raise ParseError("expected a single coefficient", number)
        coef = _int(parts[ORDER][0], number, "coefficient")
        if coef == 0:
            raise ParseError("zero coefficients are never stored", number)
        multi_index = tuple(key)
        if multi_index in entries:
            raise ParseError(f"duplicate entry {multi_index}", number)
        entries[multi_index] = field_spec.reduce(coef)

    shape = ((subdim,) * power,) * ORDER
    try:
        return SparseTensor(shape, entries, field_spec)  # type: ignore[arg-type]
    except FlatrankError as e:
        raise ParseError(str(e)) from e


# ==================== MATRICES ====================


def dump_matrix(matrix: SparseMatrix) -> str:
    lines = [f"{MATRIX_MAGIC} {FORMAT_VERSION} rows={matrix.n_rows} cols={matrix.n_cols}"]
    lines.extend(f"{row} {col} {matrix.entries[(row, col)]}" for row, col in sorted(matrix.entries))
    return "\n".join(lines) + "\n"


def load_matrix(text: str) -> SparseMatrix:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty matrix file", 1)
    header = _parse_header(lines[0], MATRIX_MAGIC, ("rows", "cols"))
    n_rows, n_cols = header["rows"], header["cols"]
    if n_rows < 0 or n_cols < 0:
        raise ParseError(f"negative matrix shape {n_rows}x{n_cols}", 1)

    entries: dict[tuple[int, int], int] = {}
    for number, line in _body(lines):
        tokens = line.split()
        if len(tokens) != 3:
            raise ParseError(f"expected 'row col coef', got {line.strip()!r}", number)
        row, col, coef = (_int(token, number, "value") for token in tokens)
        if not (0 <= row < n_rows and 0 <= col < n_cols):
            raise ParseError(f"entry ({row}, {col}) outside {n_rows}x{n_cols}", number)
        if coef == 0:
            raise ParseError("zero coefficients are never stored", number)
        if (row, col) in entries:
            raise ParseError(f"duplicate entry ({row}, {col})", number)
        entries[(row, col)] = coef
    return SparseMatrix(n_rows, n_cols, entries)


# === File helpers ===


def write_tensor(tensor: SparseTensor, path: Path) -> None:
    path.write_text(dump_tensor(tensor))
    logger.info(f"Wrote {tensor.nnz} tensor entries to {path}")


def read_tensor(path: Path, field_spec: FieldSpec | None = None) -> SparseTensor:
    return load_tensor(path.read_text(), field_spec)


def write_matrix(matrix: SparseMatrix, path: Path) -> None:
    path.write_text(dump_matrix(matrix))
    logger.info(f"Wrote {matrix.n_rows}x{matrix.n_cols} matrix ({matrix.nnz} entries) to {path}")


def read_matrix(path: Path) -> SparseMatrix:
    return load_matrix(path.read_text())
