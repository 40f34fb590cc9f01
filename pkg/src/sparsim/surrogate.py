"""Seeded generator for a synthetic brand x topic sentiment matrix.

The matrix is 78 brands by 44 topics with roughly 70% of cells missing.
Brands belong to latent segments; each segment has a set of topics it tends
to be reviewed on and a characteristic sentiment per topic. Whether a topic is present for a brand is drawn from its segment's
coverage profile, so missingness carries segment information.

This is a stand-in for exercising the pipeline end to end. It is not real
review data, and results on it say nothing about any real market.
"""
from __future__ import annotations

import numpy as np

from .dataset import SparseMatrix

SEGMENT_SIZES = (22, 18, 16, 12, 10)
N_TOPICS = 44
CORE_TOPICS_PER_SEGMENT = 15
P_CORE = 0.6
P_OTHER = 0.12
SENTIMENT_NOISE = 0.25
DEFAULT_SEED = 7


def _generate(seed: int) -> tuple[SparseMatrix, list[list[str]]]:
    rng = np.random.default_rng(seed)
    n_rows = sum(SEGMENT_SIZES)
    values = np.zeros((n_rows, N_TOPICS))
    observed = np.zeros((n_rows, N_TOPICS), dtype=bool)
    segment_of = np.zeros(n_rows, dtype=int)

    row = 0
    for seg, size in enumerate(SEGMENT_SIZES):
        core = rng.choice(N_TOPICS, size=CORE_TOPICS_PER_SEGMENT, replace=False)
        p_present = np.full(N_TOPICS, P_OTHER)
        p_present[core] = P_CORE
        mean_sentiment = rng.uniform(-0.8, 0.8, size=N_TOPICS)
        for _ in range(size):
            present = rng.random(N_TOPICS) < p_present
            noise = rng.normal(0.0, SENTIMENT_NOISE, size=N_TOPICS)
            values[row] = np.clip(mean_sentiment + noise, -1.0, 1.0)
            observed[row] = present
            segment_of[row] = seg
            row += 1

    # every topic needs at least one observation for the imputers
    for j in np.flatnonzero(~observed.any(axis=0)):
        observed[rng.integers(n_rows), j] = True

    # shuffle rows so segment membership is not readable from label order
    perm = rng.permutation(n_rows)
    values = np.round(values[perm], 4)
    observed = observed[perm]
    segment_of = segment_of[perm]
    row_labels = tuple(f"brand_{i + 1:02d}" for i in range(n_rows))
    col_labels = tuple(f"topic_{j + 1:02d}" for j in range(N_TOPICS))
    groups = [
        [row_labels[i] for i in np.flatnonzero(segment_of == seg)]
        for seg in range(len(SEGMENT_SIZES))
    ]
    return SparseMatrix(row_labels, col_labels, values, observed), groups


def generate(seed: int = DEFAULT_SEED) -> SparseMatrix:
    return _generate(seed)[0]


def segments(seed: int = DEFAULT_SEED) -> list[list[str]]:
    """Latent segment membership behind :func:`generate` with the same seed."""
    return _generate(seed)[1]
