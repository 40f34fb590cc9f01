import json
import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparsim.community import Partition
from sparsim.graph import Graph
from sparsim.metrics import (
    COMMUNITY_METRICS,
    GENERAL_METRICS,
    INFINITE,
    MetricError,
    MetricsReport,
    avg_clustering_coefficient,
    conductance,
    coverage,
    density,
    dunn_index,
    expansion,
    format_float,
    full_report,
    internal_density,
    local_modularity,
    local_modularity_terms,
    modularity_density,
    modularity_q,
    normalized_cut,
    tpr,
    transitivity,
)

from oracles import (
    local_clustering_oracle,
    modularity_pairwise,
    random_graph,
    triangle_and_triple_counts,
)

TRIANGLES = Partition((frozenset("abc"), frozenset("def")))
TOL = 1e-12

# hand evaluation on two triangles joined by the bridge c-d, triangle partition
BRIDGE_EXPECTED = {
    "modularity_q": 2 * (3 / 7 - (7 / 14) ** 2),  # 5/14
    "coverage": 6 / 7,
    "dunn_index": 1.0,
    "avg_clustering_coefficient": 7 / 9,
    "transitivity": 0.6,
    "modularity_density": 6 / 7,
    "tpr": 1.0,
    "conductance": 1 / 7,
    "expansion": 1 / 3,
    "normalized_cut": 2 / 7,
    "density": 1.0,
    "internal_density": 1.0,
    "local_modularity_term": 3 / 7 - 1 / 4,  # 5/28
}


def _nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(g.nodes)
    h.add_edges_from(g.edges())
    return h


class TestModularity:
    def test_two_disjoint_triangles(self, two_triangles):
        assert modularity_q(two_triangles, TRIANGLES) == pytest.approx(0.5, abs=TOL)
        assert local_modularity_terms(two_triangles, TRIANGLES) == pytest.approx([0.25, 0.25], abs=TOL)
        assert local_modularity(two_triangles, TRIANGLES) == pytest.approx(0.5, abs=TOL)

    def test_single_community_is_zero(self, bridge_graph):
        assert modularity_q(bridge_graph, Partition((frozenset("abcdef"),))) == pytest.approx(0.0, abs=TOL)

    def test_triangle_singletons(self):
        g = Graph("abc", [("a", "b"), ("b", "c"), ("a", "c")])
        p = Partition(tuple(frozenset(x) for x in "abc"))
        assert modularity_q(g, p) == pytest.approx(-1 / 3, abs=TOL)

    def test_singleton_local_term(self, bridge_graph):
        p = Partition((frozenset("c"), frozenset("abdef")))
        terms = dict(zip(p.communities, local_modularity_terms(bridge_graph, p)))
        assert terms[frozenset("c")] == pytest.approx(-((3 / 14) ** 2), abs=TOL)

    def test_empty_graph_errors(self):
        with pytest.raises(MetricError):
            modularity_q(Graph("ab"), Partition((frozenset("ab"),)))


class TestCoverage:
    def test_bridge(self, bridge_graph):
        assert coverage(bridge_graph, TRIANGLES) == pytest.approx(6 / 7, abs=TOL)

    def test_all_intra(self, two_triangles):
        assert coverage(two_triangles, TRIANGLES) == 1.0

    def test_all_singletons(self, bridge_graph):
        p = Partition(tuple(frozenset(x) for x in "abcdef"))
        assert coverage(bridge_graph, p) == 0.0


class TestDunn:
    def test_bridge(self, bridge_graph):
        assert dunn_index(bridge_graph, TRIANGLES) == 1.0

    def test_disconnected_is_infinite(self, two_triangles):
        assert math.isinf(dunn_index(two_triangles, TRIANGLES))

    def test_wide_community(self):
        # path a-b-c-d-e; {a,b,c} has diameter 2, the gap c-d is 1 hop
        g = Graph("abcde", [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e")])
        p = Partition((frozenset("abc"), frozenset("de")))
        lengths = dict(nx.all_pairs_shortest_path_length(_nx(g)))
        sep = min(lengths[u][v] for u in "abc" for v in "de")
        diam = max(lengths[u][v] for u in "abc" for v in "abc")
        assert dunn_index(g, p) == sep / diam == 0.5

    def test_all_singletons_undefined(self, bridge_graph):
        with pytest.raises(MetricError, match="undefined"):
            dunn_index(bridge_graph, Partition(tuple(frozenset(x) for x in "abcdef")))

    def test_needs_two_communities(self, bridge_graph):
        with pytest.raises(MetricError):
            dunn_index(bridge_graph, Partition((frozenset("abcdef"),)))


class TestClusteringAndTriangles:
    def test_triangle(self):
        g = Graph("abc", [("a", "b"), ("b", "c"), ("a", "c")])
        assert avg_clustering_coefficient(g) == 1.0
        assert transitivity(g) == 1.0
        assert tpr(g) == 1.0

    def test_path(self):
        g = Graph("abc", [("a", "b"), ("b", "c")])
        assert avg_clustering_coefficient(g) == 0.0
        assert transitivity(g) == 0.0
        assert tpr(g) == 0.0

    def test_bridge(self, bridge_graph):
        assert avg_clustering_coefficient(bridge_graph) == pytest.approx(7 / 9, abs=TOL)
        assert transitivity(bridge_graph) == pytest.approx(0.6, abs=TOL)
        assert tpr(bridge_graph) == 1.0

    def test_tpr_counts_all_nodes(self):
        g = Graph("abcde", [("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")])
        assert tpr(g, None) == pytest.approx(3 / 5, abs=TOL)


class TestModularityDensity:
    def test_two_triangles(self, two_triangles):
        assert modularity_density(two_triangles, TRIANGLES) == pytest.approx(1.0, abs=TOL)

    def test_singletons(self, bridge_graph):
        p = Partition(tuple(frozenset(x) for x in "abcdef"))
        assert modularity_density(bridge_graph, p) == 0.0

    def test_whole_triangle(self):
        g = Graph("abc", [("a", "b"), ("b", "c"), ("a", "c")])
        assert modularity_density(g, Partition((frozenset("abc"),))) == pytest.approx(1.0, abs=TOL)


class TestCommunityMetrics:
    def test_bridge_triangle(self, bridge_graph):
        s = "abc"
        assert conductance(bridge_graph, s) == pytest.approx(1 / 7, abs=TOL)
        assert expansion(bridge_graph, s) == pytest.approx(1 / 3, abs=TOL)
        assert normalized_cut(bridge_graph, s) == pytest.approx(2 / 7, abs=TOL)
        assert density(bridge_graph, s) == 1.0
        assert internal_density(bridge_graph, s) == 1.0

    def test_isolated_community(self, two_triangles):
        assert conductance(two_triangles, "abc") == 0.0
        assert expansion(two_triangles, "abc") == 0.0
        assert normalized_cut(two_triangles, "abc") == 0.0

    def test_isolated_node(self):
        g = Graph("abc", [("a", "b")])
        assert conductance(g, "c") == 0.0
        assert expansion(g, "c") == 0.0

    def test_leaf_node(self):
        g = Graph("ab", [("a", "b")])
        assert conductance(g, "a") == 1.0

    def test_singleton_with_three_edges(self):
        g = Graph("abcd", [("a", "b"), ("a", "c"), ("a", "d")])
        assert expansion(g, "a") == 3.0

    def test_whole_graph_ncut(self, bridge_graph):
        assert normalized_cut(bridge_graph, "abcdef") == 0.0

    @pytest.mark.parametrize("fn", [density, internal_density])
    def test_density_cases(self, fn):
        g = Graph("abc", [("a", "b")])
        assert fn(g, "abc") == pytest.approx(1 / 3, abs=TOL)
        assert fn(g, "a") == 0.0

    def test_expansion_of_empty_community(self, bridge_graph):
        with pytest.raises(MetricError):
            expansion(bridge_graph, [])


class TestFullReport:
    def test_bridge_fixture(self, bridge_graph):
        report = full_report(bridge_graph, TRIANGLES)
        for metric, expected in BRIDGE_EXPECTED.items():
            assert report.value(metric) == pytest.approx(expected, abs=TOL), metric
        assert report.community_sizes == [3, 3]
        assert len(report.per_community) == 2
        assert set(report.general) == set(GENERAL_METRICS)
        assert set(report.averages) == set(COMMUNITY_METRICS)

    def test_exact_fractions_behind_fixture(self):
        # the frozen constants above, re-derived as exact rationals
        assert Fraction(2) * (Fraction(3, 7) - Fraction(1, 4)) == Fraction(5, 14)
        assert (4 * 1 + 2 * Fraction(1, 3)) / 6 == Fraction(7, 9)
        assert Fraction(2 * 3, 10) == Fraction(3, 5)

    def test_no_edges(self):
        with pytest.raises(MetricError):
            full_report(Graph("ab"), Partition((frozenset("a"), frozenset("b"))))

    def test_partition_must_cover(self, bridge_graph):
        with pytest.raises(MetricError):
            full_report(bridge_graph, Partition((frozenset("abc"),)))

    def test_json_round_trip(self, bridge_graph):
        report = full_report(bridge_graph, TRIANGLES)
        report.meta = {"dataset_sha256": "abc"}
        back = MetricsReport.from_json(report.to_json())
        assert back == report

    def test_infinite_sentinel_round_trip(self, two_triangles):
        report = full_report(two_triangles, TRIANGLES)
        data = json.loads(report.to_json())
        assert data["general"]["dunn_index"] == INFINITE
        assert math.isinf(MetricsReport.from_json(report.to_json()).general["dunn_index"])

    def test_long_csv(self, tmp_path, bridge_graph):
        report = full_report(bridge_graph, TRIANGLES)
        path = tmp_path / "m.csv"
        report.write_long_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "metric,community_id,value"
        assert "coverage,,0.8571428571428571" in lines
        assert any(line.startswith("conductance,mean,") for line in lines)
        assert any(line.startswith("conductance,1,") for line in lines)
        assert len(lines) == 1 + 7 + 6 + 2 * 6

    @pytest.mark.parametrize(
        "value,text", [(math.inf, "infinite"), (-math.inf, "-infinite"), (0.1, "0.10000000000000001")]
    )
    def test_format_float(self, value, text):
        assert format_float(value) == text


@st.composite
def graph_partitions(draw, max_nodes=10):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    n = draw(st.integers(2, max_nodes))
    g = random_graph(rng, n, float(rng.uniform(0.15, 0.8)))
    n_comms = draw(st.integers(1, n))
    labels = rng.integers(n_comms, size=n)
    p = Partition.from_labels(dict(zip(g.nodes, labels.tolist())))
    return g, p


class TestProperties:
    @given(graph_partitions())
    @settings(max_examples=200, deadline=None)
    def test_modularity_is_sum_of_local_terms(self, case):
        g, p = case
        if g.n_edges == 0:
            return
        assert abs(modularity_q(g, p) - sum(local_modularity_terms(g, p))) <= 1e-10

    @given(graph_partitions())
    @settings(max_examples=200, deadline=None)
    def test_modularity_matches_pairwise_definition(self, case):
        g, p = case
        if g.n_edges == 0:
            return
        assert modularity_q(g, p) == pytest.approx(modularity_pairwise(g, p.communities), abs=1e-12)
        ref = nx.community.modularity(_nx(g), [set(c) for c in p.communities])
        assert modularity_q(g, p) == pytest.approx(ref, abs=1e-12)
        assert -1.0 <= modularity_q(g, p) <= 1.0

    @given(graph_partitions())
    @settings(max_examples=200, deadline=None)
    def test_coverage_cut_duality(self, case):
        g, p = case
        if g.n_edges == 0:
            return
        cut_total = sum(
            sum(1 for u in c for v in g.neighbors(u) if v not in c) for c in p.communities
        )
        assert coverage(g, p) == pytest.approx(1 - (cut_total / 2) / g.n_edges, abs=1e-12)

    @given(graph_partitions(max_nodes=8))
    @settings(max_examples=200, deadline=None)
    def test_triangle_metrics_match_brute_force(self, case):
        g, _ = case
        triangles, triples = triangle_and_triple_counts(g)
        expected_t = 3 * triangles / triples if triples else 0.0
        assert transitivity(g) == pytest.approx(expected_t, abs=1e-12)
        expected_c = sum(local_clustering_oracle(g, v) for v in g.nodes) / g.n_nodes
        assert avg_clustering_coefficient(g) == pytest.approx(expected_c, abs=1e-12)
        assert avg_clustering_coefficient(g) == pytest.approx(nx.average_clustering(_nx(g)), abs=1e-12)
        assert transitivity(g) == pytest.approx(nx.transitivity(_nx(g)), abs=1e-12)

    @given(graph_partitions())
    @settings(max_examples=200, deadline=None)
    def test_community_bounds(self, case):
        g, p = case
        for c in p.communities:
            assert 0.0 <= conductance(g, c) <= 1.0
            assert expansion(g, c) >= 0.0
            assert density(g, c) == internal_density(g, c)
            assert 0.0 <= density(g, c) <= 1.0

    @given(graph_partitions())
    @settings(max_examples=150, deadline=None)
    def test_ncut_symmetric_for_two_way_split(self, case):
        g, _ = case
        half = set(g.nodes[: g.n_nodes // 2])
        rest = set(g.nodes) - half
        if not half or not rest:
            return
        assert normalized_cut(g, half) == pytest.approx(normalized_cut(g, rest), abs=1e-12)

    @given(graph_partitions())
    @settings(max_examples=100, deadline=None)
    def test_report_ranges(self, case):
        g, p = case
        if g.n_edges == 0 or len(p) < 2:
            return
        try:
            report = full_report(g, p)
        except MetricError:
            return  # Dunn undefined when every community has zero diameter
        for name in ("coverage", "transitivity", "tpr", "avg_clustering_coefficient"):
            assert 0.0 <= report.general[name] <= 1.0
        assert -1.0 <= report.general["modularity_q"] <= 1.0
