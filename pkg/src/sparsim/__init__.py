"""Weighted similarity for sparse vectors without imputation.

Also provides the imputation baselines, top-K similarity graphs,
Girvan-Newman community detection and community quality metrics used to
compare them.
"""
from ._backend import BACKEND
from .community import Partition, edge_betweenness, girvan_newman
from .dataset import SparseMatrix, load_csv, stats, write_csv
from .graph import Graph, build_topk
from .imputation import ImputedMatrix, MiceConfig, impute_knn, impute_mean, impute_mice
from .metrics import MetricsReport, full_report
from .similarity import (
    SimilarityMatrix,
    canberra,
    cosine,
    euclidean,
    pairwise_matrix,
    spearman,
    weighted_similarity,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Graph",
    "ImputedMatrix",
    "MetricsReport",
    "MiceConfig",
    "Partition",
    "SimilarityMatrix",
    "SparseMatrix",
    "build_topk",
    "canberra",
    "cosine",
    "edge_betweenness",
    "euclidean",
    "full_report",
    "girvan_newman",
    "impute_knn",
    "impute_mean",
    "impute_mice",
    "load_csv",
    "pairwise_matrix",
    "spearman",
    "stats",
    "weighted_similarity",
    "write_csv",
]
