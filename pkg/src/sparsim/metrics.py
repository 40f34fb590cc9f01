"""Community quality metrics over an unweighted graph and a partition.

Two families are reported: general structure (modularity, coverage, Dunn
index, average clustering coefficient, transitivity, modularity density,
triangle participation ratio) and per-community quality (conductance,
expansion, normalized cut, density, internal density, local modularity
term), the latter also averaged over communities.

Conventions for degenerate inputs: ratio and density metrics with a zero
denominator are 0; Dunn index raises when every community has zero
diameter and is ``inf`` when no two communities are joined by a path.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional

from .community import Partition
from .graph import Graph

GENERAL_METRICS = (
    "modularity_q",
    "coverage",
    "dunn_index",
    "avg_clustering_coefficient",
    "transitivity",
    "modularity_density",
    "tpr",
)
COMMUNITY_METRICS = (
    "conductance",
    "expansion",
    "normalized_cut",
    "density",
    "internal_density",
    "local_modularity_term",
)
# direction used when comparing reports: True = larger is better
HIGHER_IS_BETTER = {
    **{name: True for name in GENERAL_METRICS},
    "conductance": False,
    "expansion": False,
    "normalized_cut": False,
    "density": True,
    "internal_density": True,
    "local_modularity_term": True,
}

INFINITE = "infinite"


class MetricError(ValueError):
    pass


def _require_edges(g: Graph) -> int:
    m = g.n_edges
    if m == 0:
        raise MetricError("metric is undefined on a graph without edges")
    return m


def _community_counts(g: Graph, community: Iterable[str]) -> tuple[int, int, int]:
    """(internal edges, boundary edges, degree sum) of a node set."""
    members = frozenset(community)
    internal2 = 0
    cut = 0
    volume = 0
    for u in members:
        for v in g.neighbors(u):
            volume += 1
            if v in members:
                internal2 += 1
            else:
                cut += 1
    return internal2 // 2, cut, volume


def modularity_q(g: Graph, p: Partition) -> float:
    m = _require_edges(g)
    return sum(local_modularity_terms(g, p, m))


def local_modularity_terms(g: Graph, p: Partition, m: Optional[int] = None) -> list[float]:
    """Per-community ``l_c/m - (d_c/2m)^2``, in partition order."""
    if m is None:
        m = _require_edges(g)
    terms = []
    for comm in p.communities:
        l_c, _, d_c = _community_counts(g, comm)
        terms.append(l_c / m - (d_c / (2 * m)) ** 2)
    return terms


def local_modularity(g: Graph, p: Partition) -> float:
    return sum(local_modularity_terms(g, p))


def coverage(g: Graph, p: Partition) -> float:
    m = _require_edges(g)
    intra = sum(_community_counts(g, c)[0] for c in p.communities)
    return intra / m


def _all_distances(g: Graph) -> dict[str, dict[str, int]]:
    return {v: g.bfs_distances(v) for v in g.nodes}


def dunn_index(g: Graph, p: Partition) -> float:
    """Smallest single-linkage hop distance between two communities over the
    largest community diameter, both measured on the whole graph."""
    if len(p) < 2:
        raise MetricError("Dunn index needs at least two communities")
    dist = _all_distances(g)
    inf = math.inf

    diam = 0.0
    for comm in p.communities:
        for u, v in combinations(comm, 2):
            diam = max(diam, dist[u].get(v, inf))
    if diam == 0:
        raise MetricError("Dunn index undefined: every community has zero diameter")

    sep = inf
    for a, b in combinations(p.communities, 2):
        for u in a:
            du = dist[u]
            for v in b:
                d = du.get(v, inf)
                if d < sep:
                    sep = d
    if math.isinf(sep) and math.isinf(diam):
        raise MetricError("Dunn index undefined: infinite separation and diameter")
    return sep / diam


def _local_clustering(g: Graph) -> dict[str, float]:
    out = {}
    for v in g.nodes:
        nbrs = list(g.neighbors(v))
        k = len(nbrs)
        if k < 2:
            out[v] = 0.0
            continue
        links = sum(1 for a, b in combinations(nbrs, 2) if g.has_edge(a, b))
        out[v] = 2.0 * links / (k * (k - 1))
    return out


def avg_clustering_coefficient(g: Graph) -> float:
    if g.n_nodes == 0:
        raise MetricError("empty graph")
    return sum(_local_clustering(g).values()) / g.n_nodes


def _triangles_per_node(g: Graph) -> dict[str, int]:
    return {
        v: sum(1 for a, b in combinations(g.neighbors(v), 2) if g.has_edge(a, b))
        for v in g.nodes
    }


def transitivity(g: Graph) -> float:
    triples = sum(g.degree(v) * (g.degree(v) - 1) // 2 for v in g.nodes)
    if triples == 0:
        return 0.0
    # each triangle is seen once from each corner
    closed = sum(_triangles_per_node(g).values())
    return closed / triples


def tpr(g: Graph, p: Optional[Partition] = None) -> float:
    """Fraction of all nodes lying on at least one triangle.

    ``p`` is accepted for signature symmetry and ignored.
    """
    if g.n_nodes == 0:
        raise MetricError("empty graph")
    tri = _triangles_per_node(g)
    return sum(1 for v in g.nodes if tri[v] > 0) / g.n_nodes


def _internal_density(n_nodes: int, m_in: int) -> float:
    if n_nodes < 2:
        return 0.0
    return 2.0 * m_in / (n_nodes * (n_nodes - 1))


def modularity_density(g: Graph, p: Partition) -> float:
    """Sum over communities of internal density times the community's share
    of edges; singleton communities contribute 0."""
    m = _require_edges(g)
    total = 0.0
    for comm in p.communities:
        m_in = _community_counts(g, comm)[0]
        total += _internal_density(len(comm), m_in) * (m_in / m)
    return total


def _cut_ratio(cut: int, m_in: int) -> float:
    den = 2 * m_in + cut
    return cut / den if den else 0.0


def conductance(g: Graph, community: Iterable[str]) -> float:
    m_in, cut, _ = _community_counts(g, community)
    return _cut_ratio(cut, m_in)


def expansion(g: Graph, community: Iterable[str]) -> float:
    members = frozenset(community)
    if not members:
        raise MetricError("empty community")
    return _community_counts(g, members)[1] / len(members)


def normalized_cut(g: Graph, community: Iterable[str]) -> float:
    members = frozenset(community)
    m_in, cut, _ = _community_counts(g, members)
    m_out = g.n_edges - m_in - cut
    # the complement's boundary is the same edge set
    return _cut_ratio(cut, m_in) + _cut_ratio(cut, m_out)


def density(g: Graph, community: Iterable[str]) -> float:
    members = frozenset(community)
    return _internal_density(len(members), _community_counts(g, members)[0])


def internal_density(g: Graph, community: Iterable[str]) -> float:
    members = frozenset(community)
    return _internal_density(len(members), _community_counts(g, members)[0])


@dataclass
class MetricsReport:
    general: dict[str, float]
    per_community: list[dict[str, float]]
    averages: dict[str, float]
    community_sizes: list[int] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def value(self, metric: str) -> float:
        """Headline value: general metric, or the community average."""
        if metric in self.general:
            return self.general[metric]
        return self.averages[metric]

    def to_dict(self) -> dict:
        return {
            "meta": self.meta,
            "general": {k: _encode(v) for k, v in self.general.items()},
            "averages": {k: _encode(v) for k, v in self.averages.items()},
            "community_sizes": list(self.community_sizes),
            "per_community": [
                {k: _encode(v) for k, v in row.items()} for row in self.per_community
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricsReport":
        return cls(
            general={k: _decode(v) for k, v in data["general"].items()},
            per_community=[{k: _decode(v) for k, v in row.items()} for row in data["per_community"]],
            averages={k: _decode(v) for k, v in data["averages"].items()},
            community_sizes=list(data.get("community_sizes", [])),
            meta=dict(data.get("meta", {})),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        return cls.from_dict(json.loads(text))

    def long_rows(self) -> list[tuple[str, str, float]]:
        """``(metric, community_id, value)``; ``community_id`` is ``""`` for
        general metrics and ``"mean"`` for community averages."""
        rows = [(k, "", v) for k, v in self.general.items()]
        rows += [(k, "mean", v) for k, v in self.averages.items()]
        for cid, row in enumerate(self.per_community):
            rows += [(k, str(cid), v) for k, v in row.items()]
        return rows

    def write_long_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["metric", "community_id", "value"])
            for metric, cid, v in self.long_rows():
                writer.writerow([metric, cid, format_float(v)])


def format_float(v: float) -> str:
    if math.isinf(v):
        return INFINITE if v > 0 else "-" + INFINITE
    return format(v, ".17g")


def _encode(v: float):
    if isinstance(v, float) and math.isinf(v):
        return INFINITE if v > 0 else "-" + INFINITE
    return v


def _decode(v):
    if v == INFINITE:
        return math.inf
    if v == "-" + INFINITE:
        return -math.inf
    return v


def full_report(g: Graph, p: Partition) -> MetricsReport:
    m = _require_edges(g)
    if not p.covers(g):
        raise MetricError("partition does not cover the graph's nodes")
    local_terms = local_modularity_terms(g, p, m)
    general = {
        "modularity_q": sum(local_terms),
        "coverage": coverage(g, p),
        "dunn_index": dunn_index(g, p),
        "avg_clustering_coefficient": avg_clustering_coefficient(g),
        "transitivity": transitivity(g),
        "modularity_density": modularity_density(g, p),
        "tpr": tpr(g),
    }
    per_community = []
    for comm, term in zip(p.communities, local_terms):
        per_community.append(
            {
                "conductance": conductance(g, comm),
                "expansion": expansion(g, comm),
                "normalized_cut": normalized_cut(g, comm),
                "density": density(g, comm),
                "internal_density": internal_density(g, comm),
                "local_modularity_term": term,
            }
        )
    k = len(per_community)
    averages = {name: sum(row[name] for row in per_community) / k for name in COMMUNITY_METRICS}
    return MetricsReport(
        general=general,
        per_community=per_community,
        averages=averages,
        community_sizes=[len(c) for c in p.communities],
    )
