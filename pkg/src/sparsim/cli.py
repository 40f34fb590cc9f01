"""Command-line entry point: ``sparsim {stats,run,grid,surrogate}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import surrogate
from ._backend import BACKEND
from .community import CommunityError
from .dataset import DatasetError, load_csv, stats, write_csv
from .graph import GraphError
from .imputation import ImputationError, MiceConfig
from .metrics import MetricError
from .pipeline import (
    DEFAULT_TOP_K,
    IMPUTERS,
    ConfigError,
    RunConfig,
    run_grid,
    run_many_k,
    similarity_for,
)
from .similarity import METHODS, SimilarityError


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="CSV: header of feature names, first column entity names")
    p.add_argument(
        "--missing-token",
        action="append",
        dest="missing_tokens",
        metavar="TOKEN",
        help="field text that marks a missing cell (repeatable; replaces the defaults '', NA, NaN, nan)",
    )


def _add_imputation(p: argparse.ArgumentParser) -> None:
    p.add_argument("--knn-k", type=int, default=4)
    p.add_argument("--mice-seed", type=int, default=0)
    p.add_argument("--mice-m", type=int, default=5, help="number of MICE chains")
    p.add_argument("--mice-iters", type=int, default=10)
    p.add_argument("--mice-no-noise", action="store_true")


def _add_graph(p: argparse.ArgumentParser, default_k) -> None:
    p.add_argument("--top-k", type=int, nargs="+", default=list(default_k), metavar="K")
    p.add_argument("--communities", type=int, default=5)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--keep-isolated",
        action="store_true",
        help="partition the full node set; edgeless nodes become singleton communities",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsim",
        description="Weighted similarity for sparse data, top-K graphs and Girvan-Newman communities.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="shape and missingness of a dataset")
    _add_input(p)

    p = sub.add_parser("run", help="one similarity configuration at one or more K")
    _add_input(p)
    p.add_argument("--similarity", choices=METHODS, default="weighted")
    p.add_argument("--impute", choices=IMPUTERS, default="none")
    _add_imputation(p)
    _add_graph(p, (100,))
    p.add_argument("--export-similarity", action="store_true", help="also write similarity.csv")

    p = sub.add_parser("grid", help="all 13 configurations at every K")
    _add_input(p)
    _add_imputation(p)
    _add_graph(p, DEFAULT_TOP_K)
    p.add_argument(
        "--mice-seeds",
        type=int,
        nargs="+",
        help="evaluate MICE cells at each of these seeds (default: --mice-seed)",
    )
    p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("surrogate", help="write the synthetic 78x44 stand-in dataset")
    p.add_argument("--seed", type=int, default=surrogate.DEFAULT_SEED)
    p.add_argument("--out", required=True, help="CSV path")
    return parser


def _config(args, similarity: str, imputer: str) -> RunConfig:
    return RunConfig(
        input=args.input,
        similarity=similarity,
        imputer=imputer,
        knn_k=args.knn_k,
        mice=MiceConfig(
            n_imputations=args.mice_m,
            n_iterations=args.mice_iters,
            rng_seed=args.mice_seed,
            noise=not args.mice_no_noise,
        ),
        top_k=tuple(args.top_k),
        target_communities=args.communities,
        out=args.out,
        missing_tokens=tuple(args.missing_tokens) if args.missing_tokens else None,
        keep_isolated=args.keep_isolated,
    )


def _cmd_stats(args) -> int:
    m = load_csv(args.input, args.missing_tokens)
    st = stats(m)
    out = st.to_dict()
    out["dataset_sha256"] = m.digest()
    print(json.dumps(out, indent=2))
    return 0


def _cmd_run(args) -> int:
    cfg = _config(args, args.similarity, args.impute)
    cfg.validate()
    start = time.perf_counter()
    results = run_many_k(cfg)
    if args.export_similarity:
        m = load_csv(cfg.input, cfg.missing_tokens)
        similarity_for(m, cfg).write_csv(Path(cfg.out) / "similarity.csv")
    for r in results:
        print(
            f"k={r.k}: {r.graph.n_nodes} nodes ({r.community_graph.n_nodes} with edges), "
            f"{r.graph.n_edges} edges, "
            f"{len(r.partition)} communities after {r.partition.n_removals} removals, "
            f"Q={r.report.general['modularity_q']:.4f}"
        )
    logging.getLogger(__name__).info("run finished in %.2fs", time.perf_counter() - start)
    return 0


def _cmd_grid(args) -> int:
    base = _config(args, "weighted", "none")
    seeds = tuple(args.mice_seeds) if args.mice_seeds else None
    start = time.perf_counter()
    grid = run_grid(base, mice_seeds=seeds, jobs=args.jobs)
    elapsed = time.perf_counter() - start
    for k in grid.ks():
        wins = [row for row in grid.winner_rows() if row["k"] == k and row["weighted_is_best"]]
        print(f"k={k}: weighted best on {len(wins)}/13 metrics: {', '.join(r['metric'] for r in wins)}")
    print(f"{len(grid.cells)} reports in {elapsed:.1f}s (backend: {BACKEND})")
    return 0


def _cmd_surrogate(args) -> int:
    m = surrogate.generate(args.seed)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_csv(m, args.out, label_header="brand")
    print(f"wrote {m.n_rows}x{m.n_cols} matrix to {args.out} (missing fraction {stats(m).missing_fraction:.3f})")
    return 0


COMMANDS = {
    "stats": _cmd_stats,
    "run": _cmd_run,
    "grid": _cmd_grid,
    "surrogate": _cmd_surrogate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (
        ConfigError, DatasetError, ImputationError, SimilarityError, GraphError, CommunityError,
        MetricError, OSError
    ) as exc:
        print(f"sparsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
