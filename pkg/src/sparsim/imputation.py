"""Mean, KNN and chained-equation (MICE) imputation baselines.

Every imputer returns an :class:`ImputedMatrix` in which the cells that
were observed in the source are bit-identical to the source values.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .dataset import SparseMatrix

log = logging.getLogger(__name__)


class ImputationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ImputedMatrix:
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    values: np.ndarray
    provenance: dict
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (len(self.row_labels), len(self.col_labels)):
            raise ImputationError("imputed grid does not match its labels")
        if not np.all(np.isfinite(values)):
            raise ImputationError("imputed matrix contains non-finite cells")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class MiceConfig:
    n_imputations: int = 5
    n_iterations: int = 10
    rng_seed: int = 0
    noise: bool = True

    def __post_init__(self):
        if self.n_imputations < 1:
            raise ImputationError("n_imputations must be >= 1")
        if self.n_iterations < 1:
            raise ImputationError("n_iterations must be >= 1")


def _observed_means(m: SparseMatrix) -> np.ndarray:
    counts = m.observed.sum(axis=0)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise ImputationError(f"column {m.col_labels[empty[0]]} has no observed values")
    return m.values.sum(axis=0) / counts


def _finish(m: SparseMatrix, filled: np.ndarray, provenance: dict, warnings=()) -> ImputedMatrix:
    out = np.array(filled, dtype=np.float64)
    # re-copy observed cells so pass-through is exact whatever the arithmetic did
    out[m.observed] = m.values[m.observed]
    return ImputedMatrix(m.row_labels, m.col_labels, out, provenance, tuple(warnings))


def impute_mean(m: SparseMatrix) -> ImputedMatrix:
    means = _observed_means(m)
    filled = np.where(m.observed, m.values, means[np.newaxis, :])
    return _finish(m, filled, {"imputer": "mean"})


def _pairwise_distances(m: SparseMatrix) -> np.ndarray:
    """Euclidean distance over co-observed columns, scaled by sqrt(n_cols / n_shared).

    Pairs with no co-observed column get ``inf``.
    """
    obs = m.observed
    vals = m.values
    n = m.n_rows
    shared = obs.astype(np.int64) @ obs.T.astype(np.int64)
    dist = np.empty((n, n))
    for i in range(n):
        both = obs[i] & obs
        diff = np.where(both, vals - vals[i], 0.0)
        ssd = np.einsum("ij,ij->i", diff, diff)
        with np.errstate(divide="ignore", invalid="ignore"):
            dist[i] = np.sqrt(ssd * (m.n_cols / shared[i]))
    dist[shared == 0] = np.inf
    np.fill_diagonal(dist, np.inf)
    return dist


def impute_knn(m: SparseMatrix, k: int = 4) -> ImputedMatrix:
    """Fill cell (i, j) with the mean of column j over i's k nearest rows that observe j.

    Falls back to the column mean (with a recorded warning) when no row
    sharing a column with i observes j.
    """
    if k < 1:
        raise ImputationError("k must be >= 1")
    means = _observed_means(m)
    dist = _pairwise_distances(m)
    filled = np.array(m.values)
    warnings = []
    idx = np.arange(m.n_rows)
    for i in range(m.n_rows):
        missing_cols = np.flatnonzero(~m.observed[i])
        if missing_cols.size == 0:
            continue
        # stable order: distance, then row index
        ranked = idx[np.lexsort((idx, dist[i]))]
        ranked = ranked[np.isfinite(dist[i, ranked])]
        for j in missing_cols:
            donors = ranked[m.observed[ranked, j]][:k]
            if donors.size == 0:
                msg = (
                    f"row {m.row_labels[i]}, column {m.col_labels[j]}: "
                    "no eligible neighbour, used column mean"
                )
                log.info(msg)
                warnings.append(msg)
                filled[i, j] = means[j]
            else:
                filled[i, j] = m.values[donors, j].mean()
    return _finish(m, filled, {"imputer": "knn", "k": k}, warnings)


def _mice_chain(m: SparseMatrix, means: np.ndarray, cfg: MiceConfig, chain: int, warned: set):
    rng = np.random.default_rng([cfg.rng_seed, chain])
    x = np.where(m.observed, m.values, means[np.newaxis, :])
    n_rows, n_cols = x.shape
    targets = [j for j in range(n_cols) if not m.observed[:, j].all()]
    for _ in range(cfg.n_iterations):
        for j in targets:
            obs_rows = m.observed[:, j]
            design = np.column_stack([np.ones(n_rows), np.delete(x, j, axis=1)])
            coef, _, rank, _ = np.linalg.lstsq(design[obs_rows], x[obs_rows, j], rcond=None)
            if rank < design.shape[1] and j not in warned:
                warned.add(j)
            pred = design[~obs_rows] @ coef
            if cfg.noise:
                resid = x[obs_rows, j] - design[obs_rows] @ coef
                dof = int(obs_rows.sum()) - rank
                sd = float(np.sqrt(resid @ resid / dof)) if dof > 0 else 0.0
                pred = pred + rng.normal(0.0, sd, size=pred.shape[0])
            x[~obs_rows, j] = pred
    return x


def impute_mice(m: SparseMatrix, cfg: MiceConfig = MiceConfig()) -> ImputedMatrix:
    """Chained-equation imputation with an OLS model per column.

    Each of ``cfg.n_imputations`` chains starts from column means and, for
    ``cfg.n_iterations`` sweeps, regresses every incomplete column on all
    the others over the rows where it is observed, refilling its missing
    cells with the prediction plus normal noise of the residual standard
    deviation. The result is the average over chains. Rank-deficient fits
    use the minimum-norm least-squares solution.
    """
    if m.n_cols < 2:
        raise ImputationError("MICE needs at least two columns")
    means = _observed_means(m)
    warned: set = set()
    total = np.zeros(m.shape)
    for chain in range(cfg.n_imputations):
        total += _mice_chain(m, means, cfg, chain, warned)
    filled = total / cfg.n_imputations
    warnings = []
    for j in sorted(warned):
        msg = f"column {m.col_labels[j]}: rank-deficient regression, used minimum-norm solution"
        log.info(msg)
        warnings.append(msg)
    provenance = {
        "imputer": "mice",
        "n_imputations": cfg.n_imputations,
        "n_iterations": cfg.n_iterations,
        "rng_seed": cfg.rng_seed,
        "noise": cfg.noise,
    }
    return _finish(m, filled, provenance, warnings)
