import datetime as dt
import itertools
import random

import networkx as nx
import pytest

import oracles
from ipcfusion.cooccur import build_cooccurrence
from ipcfusion.corpus import PatentCorpus, PatentRecord
from ipcfusion.ipc import IpcLevel, parse_ipc
from ipcfusion.metrics import (
    CentralityTable,
    Measure,
    Network,
    betweenness_centrality,
    closeness_centrality,
    clustering_coefficient,
    compute_measure,
    degree_centrality,
    rank_top,
    weighted_degree,
)

STAR = Network.from_edges("cabde", [("c", "a"), ("c", "b"), ("c", "d"), ("c", "e")])
PATH = Network.from_edges("ABC", [("A", "B"), ("B", "C")])
C4 = Network.from_edges("0123", [("0", "1"), ("1", "2"), ("2", "3"), ("3", "0")])
K3 = Network.from_edges("xyz", [("x", "y"), ("y", "z"), ("x", "z")])


def complete(n):
    labels = [f"k{i:02d}" for i in range(n)]
    return Network.from_edges(labels, itertools.combinations(labels, 2))


@pytest.fixture(scope="module")
def p123():
    recs = [
        PatentRecord(f"P{i}", dt.date(2020, 1, 1), tuple(parse_ipc(c) for c in codes))
        for i, codes in enumerate([["G06F", "H04L"], ["G06F", "H04L"], ["G06F", "G06N"]])
    ]
    return build_cooccurrence(PatentCorpus(tuple(recs)), IpcLevel.SUBCLASS)


def test_degree_star():
    d = degree_centrality(STAR).values
    assert d == {"a": 1, "b": 1, "c": 4, "d": 1, "e": 1}
    assert degree_centrality(STAR, normalized=True).values["c"] == 1.0


def test_degree_cooccurrence(p123):
    assert degree_centrality(p123).values == {"G06F": 2, "H04L": 1, "G06N": 1}


def test_weighted_degree(p123):
    assert weighted_degree(p123).values == {"G06F": 3, "H04L": 2, "G06N": 1}
    single = Network.from_edges("uvw", [("u", "v")], weights=[7])
    assert weighted_degree(single).values == {"u": 7, "v": 7, "w": 0}


def test_betweenness_path():
    b = betweenness_centrality(PATH).values
    assert b == {"A": 0.0, "B": 1.0, "C": 0.0}


def test_betweenness_cycle4():
    raw = betweenness_centrality(C4, normalized=False).values
    assert raw == pytest.approx({k: 0.5 for k in "0123"}, abs=1e-15)
    norm = betweenness_centrality(C4).values
    assert norm == pytest.approx({k: 1 / 6 for k in "0123"}, abs=1e-15)
    labels, edges = list("0123"), [("0", "1"), ("1", "2"), ("2", "3"), ("3", "0")]
    assert oracles.betweenness(labels, edges, normalized=False) == pytest.approx(raw, abs=1e-15)


def test_closeness_examples():
    assert closeness_centrality(STAR).values["c"] == 1.0
    cc = closeness_centrality(PATH).values
    assert cc["B"] == 1.0
    assert cc["A"] == pytest.approx(2 / 3, abs=1e-15) and cc["C"] == pytest.approx(2 / 3, abs=1e-15)


def test_closeness_isolated_and_components():
    net = Network.from_edges(["a", "b", "c", "d", "e"], [("a", "b"), ("c", "d")])
    cc = closeness_centrality(net).values
    assert cc["e"] == 0.0
    # component of size 2: (1/1) * (1/4)
    assert cc["a"] == pytest.approx(0.25)


def test_clustering_examples():
    assert clustering_coefficient(K3).values == {"x": 1.0, "y": 1.0, "z": 1.0}
    assert clustering_coefficient(PATH).values["B"] == 0.0
    assert clustering_coefficient(STAR).values["a"] == 0.0


def test_empty_graph():
    empty = Network.from_edges([], [])
    for m in Measure:
        assert compute_measure(empty, m).values == {}
    assert rank_top(degree_centrality(empty), 3).rows == []


def test_rank_top_tie_break():
    table = CentralityTable(Measure.DEGREE, {"B": 3, "A": 3, "C": 1}, False)
    assert rank_top(table, 2).rows == [(1, "A", 3), (2, "B", 3)]
    assert len(rank_top(table, 10).rows) == 3
    with pytest.raises(ValueError):
        rank_top(table, 0)


@pytest.mark.parametrize("seed", range(40))
def test_oracle_equivalence(seed):
    labels, edges = oracles.random_graph(random.Random(seed), 8)
    net = Network.from_edges(labels, edges)
    assert degree_centrality(net).values == oracles.degree(labels, edges)
    for name, ours, ref in [
        ("betweenness", betweenness_centrality(net).values, oracles.betweenness(labels, edges)),
        ("closeness", closeness_centrality(net).values, oracles.closeness(labels, edges)),
        ("clustering", clustering_coefficient(net).values, oracles.clustering(labels, edges)),
    ]:
        for v in labels:
            assert abs(ours[v] - ref[v]) <= 1e-12, (name, v)


@pytest.mark.parametrize("n", range(3, 11))
def test_complete_graph(n):
    net = complete(n)
    assert set(degree_centrality(net).values.values()) == {n - 1}
    assert set(betweenness_centrality(net).values.values()) == {0.0}
    assert set(closeness_centrality(net).values.values()) == {1.0}
    assert set(clustering_coefficient(net).values.values()) == {1.0}


def test_handshake_and_bounds():
    rng = random.Random(4)
    for _ in range(30):
        labels, edges = oracles.random_graph(rng, 12)
        net = Network.from_edges(labels, edges)
        assert sum(degree_centrality(net).values.values()) == 2 * len(edges)
        for m in (Measure.BETWEENNESS, Measure.CLOSENESS, Measure.CLUSTERING):
            assert all(0.0 <= x <= 1.0 + 1e-12 for x in compute_measure(net, m).values.values())


def test_against_networkx_medium():
    g = nx.gnm_random_graph(120, 400, seed=5)
    g.add_nodes_from(range(120, 125))  # isolated nodes
    labels = [f"n{i:03d}" for i in g.nodes]
    net = Network.from_edges(labels, [(labels[u], labels[v]) for u, v in g.edges])
    bc, cc, cl = (betweenness_centrality(net).values, closeness_centrality(net).values, clustering_coefficient(net).values)
    ref_b, ref_c, ref_l = nx.betweenness_centrality(g), nx.closeness_centrality(g), nx.clustering(g)
    for i in g.nodes:
        assert bc[labels[i]] == pytest.approx(ref_b[i], abs=1e-12)
        assert cc[labels[i]] == pytest.approx(ref_c[i], abs=1e-12)
        assert cl[labels[i]] == pytest.approx(ref_l[i], abs=1e-12)


def test_relabeling_invariance():
    rng = random.Random(99)
    labels, edges = [f"v{i}" for i in range(30)], []
    for i, j in itertools.combinations(range(30), 2):
        if rng.random() < 0.15:
            edges.append((f"v{i}", f"v{j}"))
    perm = labels[:]
    rng.shuffle(perm)
    mapping = dict(zip(labels, perm))
    a = Network.from_edges(labels, edges)
    b = Network.from_edges(perm, [(mapping[u], mapping[v]) for u, v in edges])
    for m in (Measure.DEGREE, Measure.BETWEENNESS, Measure.CLOSENESS, Measure.CLUSTERING):
        va, vb = compute_measure(a, m).values, compute_measure(b, m).values
        for v in labels:
            assert va[v] == pytest.approx(vb[mapping[v]], abs=1e-12)


def test_threads_do_not_change_results():
    g = nx.gnm_random_graph(400, 2000, seed=8)
    labels = [f"n{i:03d}" for i in g.nodes]
    net = Network.from_edges(labels, [(labels[u], labels[v]) for u, v in g.edges])
    one = betweenness_centrality(net, threads=1).values
    many = betweenness_centrality(net, threads=8).values
    assert one == many
    assert closeness_centrality(net, threads=1).values == closeness_centrality(net, threads=8).values


def test_table_serialization_order():
    table = CentralityTable(Measure.BETWEENNESS, {"b": 0.5, "a": 0.5, "c": 0.25}, True)
    assert table.to_csv() == "node,value\na,0.5\nb,0.5\nc,0.25\n"
    assert '"normalized": true' in table.to_json()


def test_measure_parse():
    assert Measure.parse("weighted_degree") is Measure.WEIGHTED_DEGREE
    assert Measure.parse("Clustering") is Measure.CLUSTERING
    with pytest.raises(ValueError):
        Measure.parse("pagerank")
