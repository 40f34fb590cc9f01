"""Shared test utilities: random inputs and the acceptance result log."""
import os

import numpy as np

from sparsim.dataset import SparseMatrix, bundled_dataset_path

# criterion number -> (status, detail); printed by conftest at session end
CRITERIA: dict[int, tuple[str, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    CRITERIA[number] = ("PASS" if passed else "FAIL", detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")


def random_sparse_matrix(rng, n_rows, n_cols, p_missing, every_column=True) -> SparseMatrix:
    observed = rng.random((n_rows, n_cols)) >= p_missing
    if every_column:
        observed[rng.integers(n_rows, size=n_cols), np.arange(n_cols)] = True
    values = np.where(observed, np.round(rng.normal(size=(n_rows, n_cols)), 6), 0.0)
    return SparseMatrix(
        tuple(f"r{i}" for i in range(n_rows)),
        tuple(f"c{j}" for j in range(n_cols)),
        values,
        observed,
    )


def random_masked_pair(rng, length, p_missing, scale=10.0):
    a = rng.uniform(-scale, scale, length)
    b = rng.uniform(-scale, scale, length)
    ma = rng.random(length) >= p_missing
    mb = rng.random(length) >= p_missing
    return (a, ma), (b, mb)


def case_study_path() -> tuple[str, bool]:
    """``(path, is_original)``: SPARSIM_CASE_STUDY_CSV if set, else the bundled surrogate."""
    override = os.environ.get("SPARSIM_CASE_STUDY_CSV")
    if override:
        return override, True
    return str(bundled_dataset_path()), False
