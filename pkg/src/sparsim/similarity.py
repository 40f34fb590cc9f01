"""Pairwise similarity for sparse rows, plus the classical baselines.

The weighted similarity compares two equal-length vectors without filling
in missing cells. Positions split three ways:

* both observed: scored by a bounded numeric core (cosine), scaled by the
  fraction of positions that are shared;
* both missing: each such position adds ``1 / length``;
* exactly one missing: each such position subtracts ``1 / length``.

The total therefore always lies in ``[-1, 1]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.stats import rankdata

from ._backend import kernels
from ._pykernels import cosine_core, scalar_core
from .dataset import Cell, SparseMatrix
from .imputation import ImputedMatrix

HIGHER_IS_STRONGER = "higher_is_stronger"
LOWER_IS_STRONGER = "lower_is_stronger"

METHODS = ("weighted", "cosine", "euclidean", "canberra", "spearman")
BASELINE_METHODS = METHODS[1:]


class SimilarityError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedSimilarityBreakdown:
    s_num: float
    s_nan: float
    s_non: float
    total: float
    n_shared: int
    c_nan: int
    c_non: int
    length: int


def _as_masked(v) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(v, tuple) and len(v) == 2 and isinstance(v[1], np.ndarray):
        values, mask = v
        return np.asarray(values, dtype=np.float64), mask.astype(bool)
    mask = np.array([c is not None for c in v], dtype=bool)
    values = np.array([0.0 if c is None else float(c) for c in v], dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise SimilarityError("present values must be finite")
    return values, mask


def weighted_similarity(
    v1: Sequence[Cell],
    v2: Sequence[Cell],
    core: Optional[Callable[[np.ndarray, np.ndarray], float]] = None,
) -> WeightedSimilarityBreakdown:
    """Three-part similarity of two sparse vectors.

    ``v1`` and ``v2`` are sequences where ``None`` marks a missing cell (a
    ``(values, mask)`` pair of arrays is accepted as well). ``core`` scores
    the shared sub-vectors when more than one position is shared; it must
    return a value in [-1, 1] and defaults to cosine.

    A single shared position is scored with the scalar rule
    ``sign(xy) * min(|x|, |y|) / max(|x|, |y|)``. When both shared parts
    are all zero they count as full agreement; when only one is, the shared
    part scores 0.
    """
    a, ma = _as_masked(v1)
    b, mb = _as_masked(v2)
    length = a.shape[0]
    if length == 0 or b.shape[0] != length:
        raise SimilarityError(
            f"vectors must have equal nonzero length, got {a.shape[0]} and {b.shape[0]}"
        )
    both = ma & mb
    n_shared = int(both.sum())
    c_nan = int((~ma & ~mb).sum())
    c_non = length - n_shared - c_nan

    if n_shared == 0:
        per_position = 0.0
    elif n_shared == 1:
        idx = int(np.flatnonzero(both)[0])
        per_position = scalar_core(float(a[idx]), float(b[idx]))
    else:
        fn = cosine_core if core is None else core
        per_position = float(fn(a[both], b[both]))
        if not -1.0 <= per_position <= 1.0:
            raise SimilarityError(f"similarity core returned {per_position} outside [-1, 1]")

    # One division per term keeps each term and the total inside its bound.
    shared_score = n_shared * per_position
    s_num = shared_score / length
    s_nan = c_nan / length
    s_non = -c_non / length
    total = (shared_score + c_nan - c_non) / length
    return WeightedSimilarityBreakdown(
        s_num=s_num,
        s_nan=s_nan,
        s_non=s_non,
        total=total,
        n_shared=n_shared,
        c_nan=c_nan,
        c_non=c_non,
        length=length,
    )


def _dense_pair(a, b, min_len: int = 1) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise SimilarityError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] < min_len:
        raise SimilarityError(f"vectors need at least {min_len} entries")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise SimilarityError("entries must be finite")
    return a, b


def cosine(a, b) -> float:
    a, b = _dense_pair(a, b)
    if not (np.any(a) and np.any(b)):
        raise SimilarityError("cosine is undefined for a zero vector")
    return cosine_core(a, b)


def euclidean(a, b) -> float:
    a, b = _dense_pair(a, b)
    d = a - b
    return math.sqrt(float(np.dot(d, d)))


def canberra(a, b) -> float:
    """Canberra distance; a position where both entries are 0 contributes 0."""
    a, b = _dense_pair(a, b)
    num = np.abs(a - b)
    den = np.abs(a) + np.abs(b)
    nz = den > 0
    return float(np.sum(num[nz] / den[nz]))


def spearman(a, b) -> float:
    """Rank correlation with average ranks for ties."""
    a, b = _dense_pair(a, b, min_len=2)
    ra = rankdata(a) - (a.shape[0] + 1) / 2.0
    rb = rankdata(b) - (b.shape[0] + 1) / 2.0
    sa = float(np.dot(ra, ra))
    sb = float(np.dot(rb, rb))
    if sa == 0.0 or sb == 0.0:
        raise SimilarityError("undefined correlation: a vector is constant")
    return min(1.0, max(-1.0, float(np.dot(ra, rb)) / math.sqrt(sa * sb)))


BASELINES: dict[str, Callable] = {
    "cosine": cosine,
    "euclidean": euclidean,
    "canberra": canberra,
    "spearman": spearman,
}


def strength_order(method: str) -> str:
    if method in ("euclidean", "canberra"):
        return LOWER_IS_STRONGER
    if method in ("weighted", "cosine", "spearman"):
        return HIGHER_IS_STRONGER
    raise SimilarityError(f"unknown similarity method {method!r}")


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    labels: tuple[str, ...]
    values: np.ndarray
    strength_order: str
    method: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        n = len(self.labels)
        if values.shape != (n, n):
            raise SimilarityError(f"values have shape {values.shape}, expected ({n}, {n})")
        if not np.array_equal(values, values.T):
            raise SimilarityError("similarity matrix must be symmetric")
        if self.strength_order not in (HIGHER_IS_STRONGER, LOWER_IS_STRONGER):
            raise SimilarityError(f"unknown strength order {self.strength_order!r}")
        values.flags.writeable = False
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "values", values)

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(["", *self.labels]) + "\n")
            for label, row in zip(self.labels, self.values):
                fh.write(",".join([label, *(format(float(v), ".17g") for v in row)]) + "\n")


def pairwise_matrix(m: Union[SparseMatrix, ImputedMatrix], method: str) -> SimilarityMatrix:
    """Similarity between every pair of rows.

    The weighted method runs on the raw sparse matrix; baselines need an
    imputed (dense) one.
    """
    order = strength_order(method)
    if method == "weighted":
        if not isinstance(m, SparseMatrix):
            raise SimilarityError("weighted similarity needs the raw SparseMatrix, not an imputed one")
        values = kernels.weighted_pairwise(m.values, m.observed)
        return SimilarityMatrix(m.row_labels, values, order, method)

    if not isinstance(m, ImputedMatrix):
        raise SimilarityError(f"{method} needs an ImputedMatrix; impute the sparse matrix first")
    fn = BASELINES[method]
    n = m.n_rows
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            try:
                v = fn(m.values[i], m.values[j])
            except SimilarityError as exc:
                raise SimilarityError(
                    f"{method}({m.row_labels[i]}, {m.row_labels[j]}): {exc}"
                ) from None
            values[i, j] = values[j, i] = v
    return SimilarityMatrix(m.row_labels, values, order, method)
