"""Loading, validating and describing sparse entity x feature matrices.

A missing cell is a first-class state. Internally a :class:`SparseMatrix`
holds a float array plus a boolean ``observed`` mask; values under a false
mask entry are zeroed and never read. At the public boundary a cell is a
``float`` when present and ``None`` when missing.
"""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

Cell = Optional[float]

DEFAULT_MISSING_TOKENS = frozenset({"", "NA", "NaN", "nan"})


class DatasetError(ValueError):
    """Base class for ingestion and validation failures."""


class ParseError(DatasetError):
    pass


class ValidationError(DatasetError):
    pass


def _check_labels(labels: Sequence[str], kind: str) -> None:
    if len(labels) == 0:
        raise ValidationError(f"matrix needs at least one {kind}")
    seen = set()
    for label in labels:
        if label in seen:
            raise ValidationError(f"duplicate {kind} label {label!r}")
        seen.add(label)


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Rows are entities, columns are features; any cell may be missing.

    Instances are immutable: both arrays are made read-only on construction.
    """

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    values: np.ndarray
    observed: np.ndarray

    def __post_init__(self):
        row_labels = tuple(str(r) for r in self.row_labels)
        col_labels = tuple(str(c) for c in self.col_labels)
        _check_labels(row_labels, "row")
        _check_labels(col_labels, "column")

        values = np.array(self.values, dtype=np.float64)
        observed = np.array(self.observed, dtype=bool)
        shape = (len(row_labels), len(col_labels))
        if values.shape != shape or observed.shape != shape:
            raise ValidationError(
                f"cell grid has shape {values.shape}/{observed.shape}, labels imply {shape}"
            )
        if not np.all(np.isfinite(values[observed])):
            i, j = np.argwhere(observed & ~np.isfinite(values))[0]
            raise ValidationError(
                f"non-finite present value at row {row_labels[i]!r}, column {col_labels[j]!r}"
            )
        values[~observed] = 0.0
        values.flags.writeable = False
        observed.flags.writeable = False

        object.__setattr__(self, "row_labels", row_labels)
        object.__setattr__(self, "col_labels", col_labels)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "observed", observed)

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[Sequence[Cell]],
        row_labels: Optional[Sequence[str]] = None,
        col_labels: Optional[Sequence[str]] = None,
    ) -> "SparseMatrix":
        """Build a matrix from nested lists where ``None`` marks a missing cell.

        Labels default to ``r0, r1, ...`` and ``c0, c1, ...``.
        """
        if len(rows) == 0:
            raise ValidationError("matrix needs at least one row")
        width = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != width:
                raise ValidationError(f"row {i} has {len(row)} cells, expected {width}")
        if row_labels is None:
            row_labels = [f"r{i}" for i in range(len(rows))]
        if col_labels is None:
            col_labels = [f"c{j}" for j in range(width)]
        observed = np.array([[c is not None for c in row] for row in rows], dtype=bool)
        values = np.array(
            [[0.0 if c is None else float(c) for c in row] for row in rows],
            dtype=np.float64,
        ).reshape(len(rows), width)
        return cls(tuple(row_labels), tuple(col_labels), values, observed.reshape(len(rows), width))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def cell(self, i: int, j: int) -> Cell:
        return float(self.values[i, j]) if self.observed[i, j] else None

    def row(self, i: int) -> list[Cell]:
        return [self.cell(i, j) for j in range(self.n_cols)]

    def rows(self) -> list[list[Cell]]:
        return [self.row(i) for i in range(self.n_rows)]

    def digest(self) -> str:
        """SHA-256 over labels, mask and the exact bit pattern of present values."""
        h = hashlib.sha256()
        h.update("\x1f".join(self.row_labels).encode())
        h.update(b"\x1e")
        h.update("\x1f".join(self.col_labels).encode())
        h.update(b"\x1e")
        h.update(np.ascontiguousarray(self.observed, dtype=np.uint8).tobytes())
        h.update(np.ascontiguousarray(self.values, dtype="<f8").tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
            and np.array_equal(self.observed, other.observed)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True)
class DatasetStats:
    n_rows: int
    n_cols: int
    missing_fraction: float
    row_missing: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "n_cols": self.n_cols,
            "missing_fraction": self.missing_fraction,
            "row_missing": list(self.row_missing),
        }


def stats(m: SparseMatrix) -> DatasetStats:
    missing = ~m.observed
    row_missing = tuple(int(c) for c in missing.sum(axis=1))
    total = sum(row_missing)
    return DatasetStats(
        n_rows=m.n_rows,
        n_cols=m.n_cols,
        missing_fraction=total / (m.n_rows * m.n_cols),
        row_missing=row_missing,
    )


def _parse_field(text: str, row_label: str, col_label: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(
            f"row {row_label!r}, column {col_label!r}: cannot parse {text!r} as a number"
        ) from None
    if not math.isfinite(value):
        raise ParseError(
            f"row {row_label!r}, column {col_label!r}: non-finite value {text!r}"
        )
    return value


def load_csv(path, missing_tokens: Optional[Iterable[str]] = None) -> SparseMatrix:
    """Read a UTF-8 comma-separated matrix.

    The first row is the header of feature names (its first field names the
    label column and is otherwise ignored); the first column holds entity
    names. A field is missing when, after stripping whitespace, it equals one
    of ``missing_tokens``.
    """
    tokens = DEFAULT_MISSING_TOKENS if missing_tokens is None else frozenset(missing_tokens)
    with open(path, newline="", encoding="utf-8-sig") as fh:
        records = [r for r in csv.reader(fh) if r]
    if not records:
        raise ParseError(f"{path}: empty file")

    header = records[0]
    col_labels = [c.strip() for c in header[1:]]
    width = len(header)
    row_labels = []
    values = []
    observed = []
    for idx, record in enumerate(records[1:], start=1):
        if len(record) != width:
            raise ParseError(
                f"{path}: data row {idx} has {len(record)} fields, header has {width}"
            )
        label = record[0].strip()
        row_labels.append(label)
        vals = []
        mask = []
        for col_label, raw in zip(col_labels, record[1:]):
            text = raw.strip()
            if text in tokens:
                vals.append(0.0)
                mask.append(False)
            else:
                vals.append(_parse_field(text, label, col_label))
                mask.append(True)
        values.append(vals)
        observed.append(mask)

    if not row_labels:
        raise ValidationError(f"{path}: no data rows")
    return SparseMatrix(
        tuple(row_labels),
        tuple(col_labels),
        np.array(values, dtype=np.float64).reshape(len(row_labels), len(col_labels)),
        np.array(observed, dtype=bool).reshape(len(row_labels), len(col_labels)),
    )


def write_csv(m: SparseMatrix, path, missing_token: str = "", label_header: str = "id") -> None:
    """Inverse of :func:`load_csv`; present values are written with ``repr``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([label_header, *m.col_labels])
        for i, label in enumerate(m.row_labels):
            writer.writerow(
                [label]
                + [
                    repr(float(m.values[i, j])) if m.observed[i, j] else missing_token
                    for j in range(m.n_cols)
                ]
            )


def bundled_dataset_path(name: str = "brand_topic_sentiment_surrogate.csv") -> Path:
    """Path to a CSV shipped inside the package ``data`` directory."""
    return Path(__file__).with_name("data") / name
