"""Edge betweenness and Girvan-Newman community detection."""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from ._backend import kernels
from .graph import Graph, edge_key

# Scores within this relative distance of the maximum count as tied, so the
# tie-break by edge label is not decided by accumulation rounding.
TIE_REL_TOL = 1e-9


class CommunityError(ValueError):
    pass


def _ordered(communities: Iterable[Iterable[str]]) -> tuple[frozenset[str], ...]:
    comms = [frozenset(c) for c in communities]
    return tuple(sorted(comms, key=lambda c: (-len(c), min(c))))


@dataclass(frozen=True)
class Partition:
    """Disjoint cover of a graph's nodes.

    Communities are ordered by descending size, ties by smallest member
    label; a community's index in this order is its id.
    """

    communities: tuple[frozenset[str], ...]
    n_removals: int = 0
    removed_edges: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if any(not c for c in self.communities):
            raise CommunityError("empty community")
        comms = _ordered(self.communities)
        seen: set[str] = set()
        for c in comms:
            if seen & c:
                raise CommunityError(f"node(s) {sorted(seen & c)} in more than one community")
            seen |= c
        object.__setattr__(self, "communities", comms)

    @classmethod
    def from_labels(cls, assignment: dict[str, object]) -> "Partition":
        groups: dict[object, set[str]] = {}
        for node, cid in assignment.items():
            groups.setdefault(cid, set()).add(node)
        return cls(tuple(frozenset(g) for g in groups.values()))

    def membership(self) -> dict[str, int]:
        return {node: cid for cid, comm in enumerate(self.communities) for node in comm}

    def covers(self, g: Graph) -> bool:
        return set(self.membership()) == set(g.nodes)

    def __len__(self):
        return len(self.communities)


def edge_betweenness(g: Graph, exact: bool = False) -> dict[tuple[str, str], float]:
    """Shortest-path betweenness of every edge, each unordered node pair counted once.

    With ``exact=True`` the scores are :class:`fractions.Fraction` values
    computed by a pure-Python accumulation; otherwise the active kernel
    backend is used.
    """
    if exact:
        return _exact_betweenness(g)
    indptr, indices, eids, edge_list = g.to_csr()
    bc = kernels.edge_betweenness(g.n_nodes, indptr, indices, eids, len(edge_list))
    return {e: float(b) / 2.0 for e, b in zip(edge_list, bc)}


def _exact_betweenness(g: Graph) -> dict[tuple[str, str], Fraction]:
    bc = {e: Fraction(0) for e in g.edges()}
    nodes = g.nodes
    for s in nodes:
        dist = {s: 0}
        sigma = {s: 1}
        order = [s]
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in sorted(g.neighbors(v)):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    sigma[w] = 0
                    order.append(w)
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        delta = {v: Fraction(0) for v in order}
        for w in reversed(order[1:]):
            for v in g.neighbors(w):
                if dist.get(v) == dist[w] - 1:
                    c = Fraction(sigma[v], sigma[w]) * (1 + delta[w])
                    bc[edge_key(v, w)] += c
                    delta[v] += c
    return {e: b / 2 for e, b in bc.items()}


def girvan_newman(g: Graph, target_communities: int) -> Partition:
    """Split ``g`` by repeatedly deleting its highest-betweenness edge.

    Stops as soon as the working graph has at least ``target_communities``
    connected components (immediately if it already does) and returns
    those components. Betweenness is recomputed after every removal; ties
    go to the lexicographically smallest edge.
    """
    if target_communities < 1:
        raise CommunityError("target_communities must be a positive count")
    if target_communities > g.n_nodes:
        raise CommunityError(
            f"cannot form {target_communities} communities from {g.n_nodes} nodes"
        )
    edge_list = g.edges()
    index = {v: i for i, v in enumerate(g.nodes)}
    edge_idx = np.array([(index[u], index[v]) for u, v in edge_list], dtype=np.intc).reshape(-1, 2)
    removals = kernels.girvan_newman_removals(g.n_nodes, edge_idx, target_communities, TIE_REL_TOL)

    work = g.copy()
    removed = []
    for e in removals:
        u, v = edge_list[int(e)]
        work.remove_edge(u, v)
        removed.append((u, v))
    comps = work.connected_components()
    return Partition(tuple(comps), n_removals=len(removed), removed_edges=tuple(removed))


def write_partition(p: Partition, path) -> None:
    """CSV ``node,community_id`` sorted by community id then node label."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node", "community_id"])
        for cid, comm in enumerate(p.communities):
            for node in sorted(comm):
                writer.writerow([node, cid])


def read_partition(path) -> Partition:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["node", "community_id"]:
        raise CommunityError(f"{path}: expected header 'node,community_id'")
    return Partition.from_labels({node: int(cid) for node, cid in rows[1:] if node})

