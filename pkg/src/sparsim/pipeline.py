"""End-to-end runs: load -> (impute) -> similarity -> top-K graph ->
Girvan-Newman -> metrics, and the method x imputer x K comparison grid."""
from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .community import Partition, girvan_newman, write_partition
from .dataset import SparseMatrix, load_csv
from .graph import Graph, build_topk, to_dot, write_edge_list
from .imputation import MiceConfig, impute_knn, impute_mean, impute_mice
from .metrics import (
    COMMUNITY_METRICS,
    GENERAL_METRICS,
    HIGHER_IS_BETTER,
    MetricsReport,
    format_float,
    full_report,
)
from .similarity import BASELINE_METHODS, METHODS, SimilarityMatrix, pairwise_matrix

log = logging.getLogger(__name__)

IMPUTERS = ("none", "mean", "knn", "mice")
DEFAULT_TOP_K = (100, 600, 1200)
REPORTED_METRICS = GENERAL_METRICS + COMMUNITY_METRICS
# exact-equality slack when deciding whether one metric value ties another
TIE_TOL = 1e-12


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    input: Optional[str] = None
    similarity: str = "weighted"
    imputer: str = "none"
    knn_k: int = 4
    mice: MiceConfig = field(default_factory=MiceConfig)
    top_k: tuple[int, ...] = DEFAULT_TOP_K
    target_communities: int = 5
    out: Optional[str] = None
    missing_tokens: Optional[tuple[str, ...]] = None
    # Community detection runs on the brands that keep at least one edge;
    # keep_isolated=True treats every edgeless brand as its own component.
    keep_isolated: bool = False

    def validate(self) -> None:
        if self.similarity not in METHODS:
            raise ConfigError(f"unknown similarity {self.similarity!r}; choose from {METHODS}")
        if self.imputer not in IMPUTERS:
            raise ConfigError(f"unknown imputer {self.imputer!r}; choose from {IMPUTERS}")
        if self.similarity == "weighted" and self.imputer != "none":
            raise ConfigError("weighted similarity works on raw sparse data; imputer must be 'none'")
        if self.similarity != "weighted" and self.imputer == "none":
            raise ConfigError(f"{self.similarity} needs an imputer (mean, knn or mice)")
        if self.knn_k < 1:
            raise ConfigError("knn_k must be >= 1")
        if not self.top_k or any(k < 1 for k in self.top_k):
            raise ConfigError("top_k must list positive edge counts")
        if self.target_communities < 1:
            raise ConfigError("target_communities must be >= 1")

    @property
    def label(self) -> str:
        if self.imputer == "none":
            return self.similarity
        tag = f"{self.similarity}-{self.imputer}"
        if self.imputer == "mice":
            tag += f"-seed{self.mice.rng_seed}"
        return tag


@dataclass
class RunResult:
    """``graph`` is the full top-K graph; ``community_graph`` is the one
    partitioned and scored (the same graph unless isolated nodes were dropped)."""

    config: RunConfig
    k: int
    graph: Graph
    community_graph: Graph
    partition: Partition
    report: MetricsReport


def _impute(m: SparseMatrix, cfg: RunConfig):
    if cfg.imputer == "mean":
        return impute_mean(m)
    if cfg.imputer == "knn":
        return impute_knn(m, cfg.knn_k)
    if cfg.imputer == "mice":
        return impute_mice(m, cfg.mice)
    return m


def similarity_for(m: SparseMatrix, cfg: RunConfig) -> SimilarityMatrix:
    cfg.validate()
    return pairwise_matrix(_impute(m, cfg), cfg.similarity)


def _config_meta(cfg: RunConfig, k: int, digest: str) -> dict:
    return {
        "dataset_sha256": digest,
        "similarity": cfg.similarity,
        "imputer": cfg.imputer,
        "imputer_params": _imputer_params(cfg),
        "top_k": k,
        "target_communities": cfg.target_communities,
        "keep_isolated": cfg.keep_isolated,
    }


def _imputer_params(cfg: RunConfig) -> dict:
    if cfg.imputer == "knn":
        return {"k": cfg.knn_k}
    if cfg.imputer == "mice":
        return asdict(cfg.mice)
    return {}


def _analyse(sim: SimilarityMatrix, cfg: RunConfig, k: int, digest: str) -> RunResult:
    graph = build_topk(sim, k)
    work = graph if cfg.keep_isolated else graph.without_isolated()
    partition = girvan_newman(work, cfg.target_communities)
    report = full_report(work, partition)
    report.meta = _config_meta(cfg, k, digest)
    report.meta["n_removals"] = partition.n_removals
    report.meta["isolated_nodes"] = [] if cfg.keep_isolated else graph.isolated_nodes()
    return RunResult(cfg, k, graph, work, partition, report)


def write_artifacts(result: RunResult, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_edge_list(result.graph, out / "edges.csv")
    write_partition(result.partition, out / "partition.csv")
    meta = result.report.meta
    comment = (
        f"dataset_sha256={meta.get('dataset_sha256', '')}\n"
        f"similarity={meta.get('similarity')} imputer={meta.get('imputer')} top_k={result.k}"
    )
    (out / "graph.dot").write_text(
        to_dot(result.graph, result.partition.communities, comment), encoding="utf-8"
    )
    (out / "metrics.json").write_text(result.report.to_json(), encoding="utf-8")
    result.report.write_long_csv(out / "metrics_long.csv")


def _load(cfg: RunConfig, matrix: Optional[SparseMatrix]) -> SparseMatrix:
    if matrix is not None:
        return matrix
    if cfg.input is None:
        raise ConfigError("no input dataset given")
    return load_csv(cfg.input, cfg.missing_tokens)


def run_single(
    cfg: RunConfig, k: Optional[int] = None, matrix: Optional[SparseMatrix] = None
) -> RunResult:
    """One (similarity, imputer, K) configuration; writes artifacts if ``cfg.out`` is set."""
    cfg.validate()
    if k is None:
        if len(cfg.top_k) != 1:
            raise ConfigError("run_single needs exactly one top_k value")
        k = cfg.top_k[0]
    m = _load(cfg, matrix)
    sim = similarity_for(m, cfg)
    result = _analyse(sim, cfg, k, m.digest())
    if cfg.out is not None:
        write_artifacts(result, cfg.out)
    return result


def run_many_k(cfg: RunConfig, matrix: Optional[SparseMatrix] = None) -> list[RunResult]:
    """Every K in ``cfg.top_k`` from one similarity matrix.

    With several K values and an output directory, each K gets its own
    ``k<K>`` subdirectory.
    """
    cfg.validate()
    m = _load(cfg, matrix)
    sim = similarity_for(m, cfg)
    digest = m.digest()
    results = []
    for k in cfg.top_k:
        result = _analyse(sim, cfg, k, digest)
        if cfg.out is not None:
            target = Path(cfg.out) if len(cfg.top_k) == 1 else Path(cfg.out) / f"k{k}"
            write_artifacts(result, target)
        results.append(result)
    return results


@dataclass
class GridCell:
    method: str
    imputer: str
    seed: Optional[int]
    k: int
    report: MetricsReport

    @property
    def config_label(self) -> str:
        return self.method if self.imputer == "none" else f"{self.method}-{self.imputer}"


def _better_or_equal(a: float, b: float, higher: bool) -> bool:
    if a == b:
        return True
    if math.isfinite(a) and math.isfinite(b) and abs(a - b) <= TIE_TOL * max(1.0, abs(a), abs(b)):
        return True
    return a > b if higher else a < b


@dataclass
class ComparisonGrid:
    cells: list[GridCell]
    dataset_sha256: str

    def ks(self) -> list[int]:
        return sorted({c.k for c in self.cells})

    def reports_at(self, k: int) -> list[GridCell]:
        return [c for c in self.cells if c.k == k]

    def weighted_is_best(self, k: int, metric: str) -> bool:
        """Whether the weighted run ties or beats every other configuration.

        A configuration evaluated at several seeds (MICE) counts as beaten
        when the weighted value ties or beats it on a strict majority of
        its seeds.
        """
        higher = HIGHER_IS_BETTER[metric]
        cells = self.reports_at(k)
        weighted = [c for c in cells if c.method == "weighted"]
        if len(weighted) != 1:
            raise ValueError(f"expected one weighted cell at k={k}, found {len(weighted)}")
        w = weighted[0].report.value(metric)
        groups: dict[str, list[float]] = {}
        for c in cells:
            if c.method != "weighted":
                groups.setdefault(c.config_label, []).append(c.report.value(metric))
        for vals in groups.values():
            wins = sum(_better_or_equal(w, v, higher) for v in vals)
            if 2 * wins <= len(vals):
                return False
        return True

    def winner_rows(self) -> list[dict]:
        rows = []
        for k in self.ks():
            cells = self.reports_at(k)
            for metric in REPORTED_METRICS:
                higher = HIGHER_IS_BETTER[metric]
                w = next(c for c in cells if c.method == "weighted").report.value(metric)
                others = [c.report.value(metric) for c in cells if c.method != "weighted"]
                best_other = (max if higher else min)(others) if others else math.nan
                rows.append(
                    {
                        "k": k,
                        "metric": metric,
                        "direction": "higher" if higher else "lower",
                        "weighted_value": w,
                        "best_other_value": best_other,
                        "weighted_is_best": self.weighted_is_best(k, metric),
                    }
                )
        return rows

    def write_csv(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "grid_metrics.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["method", "imputer", "seed", "k", "metric", "value"])
            for c in self.cells:
                for metric in REPORTED_METRICS:
                    writer.writerow(
                        [
                            c.method,
                            c.imputer,
                            "" if c.seed is None else c.seed,
                            c.k,
                            metric,
                            format_float(c.report.value(metric)),
                        ]
                    )
        with open(out / "grid_winners.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["k", "metric", "direction", "weighted_value", "best_other_value", "weighted_is_best"]
            )
            for row in self.winner_rows():
                writer.writerow(
                    [
                        row["k"],
                        row["metric"],
                        row["direction"],
                        format_float(row["weighted_value"]),
                        format_float(row["best_other_value"]),
                        int(row["weighted_is_best"]),
                    ]
                )
        summary = {"dataset_sha256": self.dataset_sha256, "n_cells": len(self.cells)}
        (out / "grid_summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")


def grid_configs(base: RunConfig, mice_seeds: Sequence[int]) -> list[RunConfig]:
    """Weighted plus every baseline x imputer pair; MICE once per seed."""
    configs = [replace(base, similarity="weighted", imputer="none")]
    for method in BASELINE_METHODS:
        for imputer in ("mean", "knn", "mice"):
            if imputer == "mice":
                for seed in mice_seeds:
                    configs.append(
                        replace(base, similarity=method, imputer=imputer,
                                mice=replace(base.mice, rng_seed=seed))
                    )
            else:
                configs.append(replace(base, similarity=method, imputer=imputer))
    return configs


def _grid_job(cfg: RunConfig, m: SparseMatrix, imputed, out: Optional[str]) -> list[GridCell]:
    try:
        sim = pairwise_matrix(imputed, cfg.similarity)
        digest = m.digest()
        cells = []
        for k in cfg.top_k:
            result = _analyse(sim, cfg, k, digest)
            if out is not None:
                write_artifacts(result, Path(out) / "cells" / cfg.label / f"k{k}")
            seed = cfg.mice.rng_seed if cfg.imputer == "mice" else None
            cells.append(GridCell(cfg.similarity, cfg.imputer, seed, k, result.report))
        return cells
    except Exception as exc:
        raise RuntimeError(f"grid cell {cfg.label} failed: {exc}") from exc


def run_grid(
    base: RunConfig,
    mice_seeds: Optional[Sequence[int]] = None,
    matrix: Optional[SparseMatrix] = None,
    jobs: int = 1,
) -> ComparisonGrid:
    """All 13 (similarity, imputer) configurations at every K in ``base.top_k``.

    ``mice_seeds`` defaults to the base MICE seed alone. Imputations are
    computed once and shared by every similarity method.
    """
    if mice_seeds is None:
        mice_seeds = (base.mice.rng_seed,)
    m = _load(base, matrix)
    configs = grid_configs(base, mice_seeds)
    for cfg in configs:
        cfg.validate()

    imputed_cache: dict = {}
    inputs = []
    for cfg in configs:
        key = (cfg.imputer, cfg.knn_k, cfg.mice if cfg.imputer == "mice" else None)
        if key not in imputed_cache:
            imputed_cache[key] = _impute(m, cfg)
        inputs.append(imputed_cache[key])

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_grid_job, cfg, m, imp, base.out) for cfg, imp in zip(configs, inputs)]
            batches = [f.result() for f in futures]
    else:
        batches = [_grid_job(cfg, m, imp, base.out) for cfg, imp in zip(configs, inputs)]

    cells = [cell for batch in batches for cell in batch]
    grid = ComparisonGrid(cells, m.digest())
    if base.out is not None:
        grid.write_csv(base.out)
    return grid


def default_jobs() -> int:
    return max(1, min(8, (os.cpu_count() or 1)))
