import json
import math
import subprocess
import sys

import numpy as np
import pytest

from sparsim import surrogate
from sparsim.cli import main
from sparsim.dataset import load_csv, write_csv
from sparsim.imputation import MiceConfig
from sparsim.metrics import MetricsReport
from sparsim.pipeline import (
    REPORTED_METRICS,
    ComparisonGrid,
    ConfigError,
    GridCell,
    RunConfig,
    _better_or_equal,
    grid_configs,
    run_grid,
    run_many_k,
    run_single,
)

from helpers import random_sparse_matrix

ARTIFACTS = ("edges.csv", "partition.csv", "graph.dot", "metrics.json", "metrics_long.csv")


@pytest.fixture
def small(rng):
    return random_sparse_matrix(rng, 20, 8, 0.5)


@pytest.fixture
def small_csv(tmp_path, small):
    path = tmp_path / "data.csv"
    write_csv(small, path)
    return path


class TestRunConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"similarity": "weighted", "imputer": "mean"},
            {"similarity": "cosine", "imputer": "none"},
            {"similarity": "jaccard"},
            {"similarity": "cosine", "imputer": "median"},
            {"knn_k": 0},
            {"top_k": ()},
            {"top_k": (0,)},
            {"target_communities": 0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            RunConfig(**kwargs).validate()

    @pytest.mark.parametrize(
        "kwargs,label",
        [
            ({}, "weighted"),
            ({"similarity": "canberra", "imputer": "knn"}, "canberra-knn"),
            ({"similarity": "cosine", "imputer": "mice", "mice": MiceConfig(rng_seed=3)}, "cosine-mice-seed3"),
        ],
    )
    def test_label(self, kwargs, label):
        assert RunConfig(**kwargs).label == label

    def test_grid_has_thirteen_configs(self):
        assert len(grid_configs(RunConfig(), [0])) == 13
        assert len(grid_configs(RunConfig(), [0, 1, 2])) == 21


class TestRuns:
    def test_run_single_writes_artifacts(self, tmp_path, small):
        out = tmp_path / "out"
        result = run_single(RunConfig(top_k=(30,), target_communities=3, out=str(out)), matrix=small)
        for name in ARTIFACTS:
            assert (out / name).exists(), name
        assert result.graph.n_edges == 30
        meta = json.loads((out / "metrics.json").read_text())["meta"]
        assert meta["dataset_sha256"] == small.digest()
        assert meta["top_k"] == 30
        assert small.digest() in (out / "graph.dot").read_text()
        assert MetricsReport.from_json((out / "metrics.json").read_text()) == result.report

    def test_run_single_needs_one_k(self, small):
        with pytest.raises(ConfigError):
            run_single(RunConfig(top_k=(10, 20)), matrix=small)

    def test_no_input(self):
        with pytest.raises(ConfigError):
            run_single(RunConfig(top_k=(10,)))

    def test_run_many_k_subdirectories(self, tmp_path, small):
        out = tmp_path / "out"
        cfg = RunConfig(similarity="cosine", imputer="mean", top_k=(20, 40), target_communities=3, out=str(out))
        results = run_many_k(cfg, matrix=small)
        assert [r.k for r in results] == [20, 40]
        for k in (20, 40):
            assert (out / f"k{k}" / "metrics.json").exists()

    def test_isolated_nodes_handling(self, small):
        dropped = run_single(RunConfig(top_k=(5,), target_communities=2), matrix=small)
        kept = run_single(RunConfig(top_k=(5,), target_communities=2, keep_isolated=True), matrix=small)
        assert dropped.community_graph.n_nodes < small.n_rows
        assert dropped.report.meta["isolated_nodes"] == dropped.graph.isolated_nodes()
        assert kept.partition.covers(kept.graph)
        assert len(kept.partition) >= len(kept.graph.isolated_nodes())

    def test_byte_identical_reruns(self, tmp_path, small):
        for run in ("a", "b"):
            cfg = RunConfig(similarity="euclidean", imputer="mice", top_k=(25,),
                            target_communities=3, out=str(tmp_path / run))
            run_single(cfg, matrix=small)
        for name in ARTIFACTS:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


class TestGrid:
    def test_one_k_gives_thirteen_reports(self, tmp_path, small):
        grid = run_grid(RunConfig(top_k=(30,), target_communities=3, out=str(tmp_path)), matrix=small)
        assert len(grid.cells) == 13
        assert grid.dataset_sha256 == small.digest()
        for name in ("grid_metrics.csv", "grid_winners.csv", "grid_summary.json"):
            assert (tmp_path / name).exists()
        winners = (tmp_path / "grid_winners.csv").read_text().splitlines()
        assert len(winners) == 1 + len(REPORTED_METRICS)
        assert (tmp_path / "cells" / "cosine-mice-seed0" / "k30" / "metrics.json").exists()

    def test_parallel_matches_serial(self, small):
        cfg = RunConfig(top_k=(30,), target_communities=3)
        serial = run_grid(cfg, matrix=small)
        parallel = run_grid(cfg, matrix=small, jobs=2)
        assert [c.report for c in serial.cells] == [c.report for c in parallel.cells]


def _cell(method, imputer, value, seed=None):
    report = MetricsReport(general={"coverage": value}, averages={}, per_community=[], community_sizes=[])
    return GridCell(method, imputer, seed, 10, report)


class TestWinnerLogic:
    @pytest.mark.parametrize(
        "a,b,higher,expected",
        [
            (0.5, 0.4, True, True),
            (0.4, 0.5, True, False),
            (0.4, 0.5, False, True),
            (0.5, 0.5 + 1e-15, True, True),
            (math.inf, math.inf, True, True),
            (math.inf, 3.0, True, True),
            (3.0, math.inf, True, False),
        ],
    )
    def test_better_or_equal(self, a, b, higher, expected):
        assert _better_or_equal(a, b, higher) is expected

    def test_mice_majority_vote(self):
        cells = [
            _cell("weighted", "none", 0.5),
            _cell("cosine", "mice", 0.4, 0),
            _cell("cosine", "mice", 0.6, 1),
            _cell("cosine", "mice", 0.45, 2),
        ]
        assert ComparisonGrid(cells, "x").weighted_is_best(10, "coverage")
        cells[3] = _cell("cosine", "mice", 0.7, 2)
        assert not ComparisonGrid(cells, "x").weighted_is_best(10, "coverage")

    def test_single_baseline_must_not_beat_weighted(self):
        cells = [_cell("weighted", "none", 0.5), _cell("cosine", "mean", 0.51)]
        assert not ComparisonGrid(cells, "x").weighted_is_best(10, "coverage")

    def test_needs_one_weighted_cell(self):
        with pytest.raises(ValueError):
            ComparisonGrid([_cell("cosine", "mean", 0.5)], "x").weighted_is_best(10, "coverage")


class TestCli:
    def test_stats(self, small_csv, small, capsys):
        assert main(["stats", "--input", str(small_csv)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["n_rows"] == 20 and out["n_cols"] == 8
        assert out["dataset_sha256"] == small.digest()

    def test_run(self, small_csv, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["run", "--input", str(small_csv), "--top-k", "30", "--communities", "3",
                     "--out", str(out), "--export-similarity"])
        assert code == 0
        assert "k=30:" in capsys.readouterr().out
        for name in ARTIFACTS + ("similarity.csv",):
            assert (out / name).exists(), name

    def test_run_baseline(self, small_csv, tmp_path):
        code = main(["run", "--input", str(small_csv), "--similarity", "spearman", "--impute", "knn",
                     "--top-k", "15", "25", "--communities", "2", "--out", str(tmp_path / "o")])
        assert code == 0
        assert (tmp_path / "o" / "k25" / "partition.csv").exists()

    def test_grid(self, small_csv, tmp_path, capsys):
        code = main(["grid", "--input", str(small_csv), "--top-k", "30", "--communities", "3",
                     "--mice-seeds", "0", "1", "--out", str(tmp_path / "g")])
        assert code == 0
        assert "17 reports" in capsys.readouterr().out

    def test_surrogate(self, tmp_path):
        path = tmp_path / "s.csv"
        assert main(["surrogate", "--out", str(path)]) == 0
        m = load_csv(path)
        assert m.shape == (78, 44)
        assert m.digest() == surrogate.generate().digest()

    @pytest.mark.parametrize(
        "argv",
        [
            ["run", "--similarity", "weighted", "--impute", "mean"],
            ["run", "--similarity", "cosine"],
            ["run", "--top-k", "10000"],
        ],
    )
    def test_errors_exit_two(self, small_csv, tmp_path, argv, capsys):
        code = main(argv + ["--input", str(small_csv), "--out", str(tmp_path / "x")])
        assert code == 2
        assert capsys.readouterr().err.startswith("sparsim: error:")

    def test_missing_file(self, tmp_path):
        assert main(["stats", "--input", str(tmp_path / "nope.csv")]) == 2

    def test_console_script_module(self, small_csv):
        out = subprocess.run(
            [sys.executable, "-m", "sparsim.cli", "stats", "--input", str(small_csv)],
            capture_output=True, text=True, check=True,
        )
        assert json.loads(out.stdout)["n_rows"] == 20


def test_weighted_runs_on_sparse_rows_without_imputation(rng):
    m = random_sparse_matrix(rng, 15, 6, 0.85, every_column=False)
    result = run_single(RunConfig(top_k=(10,), target_communities=2), matrix=m)
    assert np.isfinite(result.report.general["modularity_q"])
