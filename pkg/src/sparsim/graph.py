"""Undirected, unweighted labelled graphs and top-K edge retention."""
from __future__ import annotations

from collections import deque
from typing import Iterable, Optional, Sequence

import numpy as np

from .similarity import HIGHER_IS_STRONGER, SimilarityMatrix


class GraphError(ValueError):
    pass


def edge_key(u: str, v: str) -> tuple[str, str]:
    """Canonical form of an unordered label pair."""
    return (u, v) if u <= v else (v, u)


class Graph:
    """Simple undirected graph over string labels.

    Node order is insertion order and is kept stable; isolated nodes are
    first-class members.
    """

    def __init__(self, nodes: Iterable[str] = (), edges: Iterable[tuple[str, str]] = ()):
        self._adj: dict[str, set[str]] = {}
        for node in nodes:
            self.add_node(node)
        for u, v in edges:
            self.add_edge(u, v)

    def add_node(self, node: str) -> None:
        node = str(node)
        if node in self._adj:
            raise GraphError(f"duplicate node {node!r}")
        self._adj[node] = set()

    def add_edge(self, u: str, v: str) -> None:
        if u == v:
            raise GraphError(f"self-loop on {u!r}")
        for x in (u, v):
            if x not in self._adj:
                raise GraphError(f"unknown node {x!r}")
        if v in self._adj[u]:
            raise GraphError(f"duplicate edge {edge_key(u, v)}")
        self._adj[u].add(v)
        self._adj[v].add(u)

    def remove_edge(self, u: str, v: str) -> None:
        if v not in self._adj.get(u, ()):
            raise GraphError(f"no edge {edge_key(u, v)}")
        self._adj[u].discard(v)
        self._adj[v].discard(u)

    def has_edge(self, u: str, v: str) -> bool:
        return v in self._adj.get(u, ())

    @property
    def nodes(self) -> tuple[str, ...]:
        return tuple(self._adj)

    def neighbors(self, node: str) -> frozenset[str]:
        return frozenset(self._adj[node])

    def degree(self, node: str) -> int:
        return len(self._adj[node])

    def edges(self) -> list[tuple[str, str]]:
        """All edges as canonical pairs, sorted."""
        return sorted({edge_key(u, v) for u, nbrs in self._adj.items() for v in nbrs})

    @property
    def n_nodes(self) -> int:
        return len(self._adj)

    @property
    def n_edges(self) -> int:
        return sum(len(n) for n in self._adj.values()) // 2

    def subgraph(self, nodes: Iterable[str]) -> "Graph":
        """Induced subgraph, keeping this graph's node order."""
        keep = set(nodes)
        g = Graph(v for v in self._adj if v in keep)
        for u in g._adj:
            g._adj[u] = self._adj[u] & keep
        return g

    def isolated_nodes(self) -> list[str]:
        return [v for v, nbrs in self._adj.items() if not nbrs]

    def without_isolated(self) -> "Graph":
        return self.subgraph(v for v, nbrs in self._adj.items() if nbrs)

    def copy(self) -> "Graph":
        g = Graph(self.nodes)
        for u, nbrs in self._adj.items():
            g._adj[u] = set(nbrs)
        return g

    def connected_components(self) -> list[frozenset[str]]:
        seen: set[str] = set()
        comps = []
        for s in self._adj:
            if s in seen:
                continue
            comp = {s}
            queue = deque([s])
            seen.add(s)
            while queue:
                v = queue.popleft()
                for w in self._adj[v]:
                    if w not in seen:
                        seen.add(w)
                        comp.add(w)
                        queue.append(w)
            comps.append(frozenset(comp))
        return comps

    def bfs_distances(self, source: str) -> dict[str, int]:
        dist = {source: 0}
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for w in self._adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    def to_csr(self, edge_order: Optional[Sequence[tuple[str, str]]] = None):
        """Index-based CSR view: ``(indptr, indices, eids, edge_list)``.

        Neighbours are listed in ascending node-index order; ``eids`` gives
        each slot's position in ``edge_list`` (canonical pairs, sorted unless
        ``edge_order`` is supplied).
        """
        index = {v: i for i, v in enumerate(self._adj)}
        edge_list = list(edge_order) if edge_order is not None else self.edges()
        eid = {}
        for e, (u, v) in enumerate(edge_list):
            eid[(index[u], index[v])] = e
            eid[(index[v], index[u])] = e
        indptr = [0]
        indices = []
        eids = []
        for u in self._adj:
            iu = index[u]
            for iv in sorted(index[v] for v in self._adj[u]):
                indices.append(iv)
                eids.append(eid[(iu, iv)])
            indptr.append(len(indices))
        return (
            np.array(indptr, dtype=np.intc),
            np.array(indices, dtype=np.intc),
            np.array(eids, dtype=np.intc),
            edge_list,
        )

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges() == other.edges()

    def __repr__(self):
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


def build_topk(sim: SimilarityMatrix, k: int) -> Graph:
    """Keep the ``k`` strongest off-diagonal pairs as unweighted edges.

    Strength follows ``sim.strength_order``; equal strengths are broken by
    the canonical label pair.
    """
    labels = sim.labels
    n = len(labels)
    available = n * (n - 1) // 2
    if k < 1:
        raise GraphError("k must be a positive count")
    if k > available:
        raise GraphError(f"k={k} exceeds the {available} available node pairs")
    sign = -1.0 if sim.strength_order == HIGHER_IS_STRONGER else 1.0
    iu, ju = np.triu_indices(n, k=1)
    pairs = sorted(
        (sign * float(sim.values[i, j]), edge_key(labels[i], labels[j]))
        for i, j in zip(iu.tolist(), ju.tolist())
    )
    g = Graph(labels)
    for _, (u, v) in pairs[:k]:
        g.add_edge(u, v)
    return g


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("u,v\n")
        for u, v in g.edges():
            fh.write(f"{_csv_field(u)},{_csv_field(v)}\n")


def read_edge_list(path, nodes: Optional[Sequence[str]] = None) -> Graph:
    import csv

    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["u", "v"]:
        raise GraphError(f"{path}: expected header 'u,v'")
    edges = [tuple(r) for r in rows[1:] if r]
    if nodes is None:
        seen: dict[str, None] = {}
        for u, v in edges:
            seen.setdefault(u)
            seen.setdefault(v)
        nodes = list(seen)
    return Graph(nodes, edges)


def _csv_field(text: str) -> str:
    if any(ch in text for ch in ',"\n\r'):
        return '"' + text.replace('"', '""') + '"'
    return text


PALETTE = ("#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00")
OVERFLOW_COLOR = "#bbbbbb"


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: Graph, communities: Optional[Sequence[Iterable[str]]] = None, comment: str = "") -> str:
    """Graphviz source; node fill colour encodes community index.

    The first five communities take the fixed palette, any further ones are
    grey. Layout is left to the renderer.
    """
    color = {}
    if communities is not None:
        for cid, comm in enumerate(communities):
            for node in comm:
                color[node] = PALETTE[cid] if cid < len(PALETTE) else OVERFLOW_COLOR
    lines = []
    if comment:
        lines.extend(f"// {line}" for line in comment.splitlines())
    lines.append("graph G {")
    lines.append("  node [style=filled];")
    for node in g.nodes:
        if node in color:
            lines.append(f'  {_dot_id(node)} [fillcolor="{color[node]}"];')
        else:
            lines.append(f"  {_dot_id(node)};")
    for u, v in g.edges():
        lines.append(f"  {_dot_id(u)} -- {_dot_id(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
