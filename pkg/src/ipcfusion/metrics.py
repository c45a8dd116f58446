"""Centrality and clustering measures over the binary co-occurrence graph.

All-pairs work (betweenness, closeness) runs a level-synchronous BFS for a
block of sources at once: path counts for every source in the block are
advanced with one sparse-times-dense product per BFS level, and Brandes'
dependency accumulation is replayed level by level in reverse. Blocks have
a fixed size and are reduced in block order, so results do not depend on
the worker count.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from ._parallel import ordered_map
from .cooccur import CooccurrenceGraph

SOURCE_BLOCK = 128


class Measure(enum.Enum):
    DEGREE = "degree"
    WEIGHTED_DEGREE = "weighted-degree"
    BETWEENNESS = "betweenness"
    CLOSENESS = "closeness"
    CLUSTERING = "clustering"

    @classmethod
    def parse(cls, text: str | Measure) -> Measure:
        if isinstance(text, Measure):
            return text
        key = str(text).strip().lower().replace("_", "-")
        aliases = {"weighted": "weighted-degree", "clustering-coefficient": "clustering"}
        return cls(aliases.get(key, key))


# measures reported in Table-1 style outputs
TABLE_MEASURES = (Measure.DEGREE, Measure.BETWEENNESS, Measure.CLOSENESS, Measure.CLUSTERING)


@dataclass(frozen=True)
class Network:
    """Labelled undirected graph: sorted labels plus a symmetric CSR matrix.

    ``adjacency`` holds edge weights; the metrics only look at its
    sparsity pattern except for weighted degree.
    """

    labels: tuple[str, ...]
    adjacency: sp.csr_matrix

    @classmethod
    def from_graph(cls, graph: CooccurrenceGraph) -> Network:
        return cls(tuple(str(c) for c in graph.node_order), graph.adjacency_matrix(weighted=True))

    @classmethod
    def from_edges(cls, labels: Iterable[str], edges: Iterable[tuple[str, str]], weights: Sequence[float] | None = None) -> Network:
        labels = tuple(sorted(set(labels)))
        index = {lab: i for i, lab in enumerate(labels)}
        acc: dict[tuple[int, int], float] = {}
        edges = list(edges)
        weights = [1.0] * len(edges) if weights is None else list(weights)
        for (a, b), w in zip(edges, weights):
            i, j = index[a], index[b]
            if i == j:
                raise ValueError("self-loops are not allowed")
            key = (min(i, j), max(i, j))
            acc[key] = acc.get(key, 0.0) + float(w)
        n = len(labels)
        if acc:
            ij = np.array(list(acc.keys()), dtype=np.int64)
            w = np.array(list(acc.values()))
            rows = np.concatenate([ij[:, 0], ij[:, 1]])
            cols = np.concatenate([ij[:, 1], ij[:, 0]])
            mat = sp.csr_matrix((np.concatenate([w, w]), (rows, cols)), shape=(n, n))
        else:
            mat = sp.csr_matrix((n, n))
        mat.sort_indices()
        return cls(labels, mat)

    @property
    def n(self) -> int:
        return len(self.labels)

    def binary(self) -> sp.csr_matrix:
        a = self.adjacency.copy()
        a.data = np.ones_like(a.data)
        return a


def _as_network(graph) -> Network:
    return graph if isinstance(graph, Network) else Network.from_graph(graph)


@dataclass(frozen=True)
class CentralityTable:
    measure: Measure
    values: dict[str, float]
    normalized: bool

    def ranked(self) -> list[tuple[str, float]]:
        return sorted(self.values.items(), key=lambda kv: (-kv[1], kv[0]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", "value"])
        for node, value in self.ranked():
            w.writerow([node, _fmt(value)])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "measure": self.measure.value,
            "normalized": self.normalized,
            "rows": [{"node": node, "value": value} for node, value in self.ranked()],
        }
        return json.dumps(doc, indent=2) + "\n"


@dataclass(frozen=True)
class RankedList:
    measure: Measure
    rows: list[tuple[int, str, float]]

    def to_dict(self) -> dict:
        return {
            "measure": self.measure.value,
            "rows": [{"rank": r, "node": n, "value": v} for r, n, v in self.rows],
        }


def _fmt(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def degree_centrality(graph, normalized: bool = False) -> CentralityTable:
    net = _as_network(graph)
    deg = np.diff(net.adjacency.indptr).astype(float)
    if normalized and net.n >= 2:
        deg = deg / (net.n - 1)
    return CentralityTable(Measure.DEGREE, dict(zip(net.labels, deg.tolist())), normalized and net.n >= 2)


def weighted_degree(graph) -> CentralityTable:
    net = _as_network(graph)
    strength = np.asarray(net.adjacency.sum(axis=1)).ravel()
    return CentralityTable(Measure.WEIGHTED_DEGREE, dict(zip(net.labels, strength.tolist())), False)


def _bfs_block(a: sp.csr_matrix, sources: np.ndarray):
    """Distances and shortest-path counts from every source in the block.

    Rows index sources, columns index nodes; unreachable nodes keep
    distance -1 and zero paths.
    """
    k, n = len(sources), a.shape[0]
    rows = np.arange(k)
    dist = np.full((k, n), -1, dtype=np.int32)
    sigma = np.zeros((k, n))
    dist[rows, sources] = 0
    sigma[rows, sources] = 1.0
    frontier = sigma.copy()
    depth = 0
    while True:
        nxt = np.asarray(a @ frontier.T).T
        reached = (nxt > 0) & (dist < 0)
        if not reached.any():
            break
        depth += 1
        dist[reached] = depth
        sigma[reached] = nxt[reached]
        frontier = np.where(reached, nxt, 0.0)
    return dist, sigma, depth


def _betweenness_block(a: sp.csr_matrix, sources: np.ndarray) -> np.ndarray:
    dist, sigma, depth = _bfs_block(a, sources)
    delta = np.zeros_like(sigma)
    safe = np.where(sigma > 0, sigma, 1.0)
    for level in range(depth, 0, -1):
        w = np.where(dist == level, (1.0 + delta) / safe, 0.0)
        back = np.asarray(a @ w.T).T
        delta += np.where(dist == level - 1, back * sigma, 0.0)
    delta[np.arange(len(sources)), sources] = 0.0
    return delta.sum(axis=0)


def _closeness_block(a: sp.csr_matrix, sources: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dist, _, _ = _bfs_block(a, sources)
    reach = dist > 0
    return reach.sum(axis=1), np.where(reach, dist, 0).sum(axis=1)


def _blocks(n: int) -> list[np.ndarray]:
    return [np.arange(s, min(s + SOURCE_BLOCK, n)) for s in range(0, n, SOURCE_BLOCK)]


def betweenness_centrality(graph, normalized: bool = True, threads: int | None = None) -> CentralityTable:
    """Exact shortest-path betweenness over unordered pairs, endpoints excluded.

    With ``normalized`` the raw score is divided by ``(n-1)(n-2)/2``, the
    number of pairs not involving the node.
    """
    net = _as_network(graph)
    n = net.n
    if n == 0:
        return CentralityTable(Measure.BETWEENNESS, {}, normalized)
    a = net.binary()
    parts = ordered_map(lambda src: _betweenness_block(a, src), _blocks(n), threads)
    total = np.zeros(n)
    for part in parts:
        total += part
    # each unordered pair was counted once from each end
    bc = total / 2.0
    if normalized:
        bc = bc / ((n - 1) * (n - 2) / 2.0) if n >= 3 else np.zeros(n)
    return CentralityTable(Measure.BETWEENNESS, dict(zip(net.labels, bc.tolist())), normalized)


def closeness_centrality(graph, threads: int | None = None) -> CentralityTable:
    """Hop-count closeness, scaled by the reachable fraction of the graph.

    For a node whose component holds ``r`` other nodes at total distance
    ``s``: ``(r / s) * (r / (n - 1))``. Isolated nodes score 0.
    """
    net = _as_network(graph)
    n = net.n
    if n == 0:
        return CentralityTable(Measure.CLOSENESS, {}, True)
    a = net.binary()
    parts = ordered_map(lambda src: _closeness_block(a, src), _blocks(n), threads)
    reach = np.concatenate([p[0] for p in parts]).astype(float)
    dsum = np.concatenate([p[1] for p in parts]).astype(float)
    cc = np.zeros(n)
    ok = dsum > 0
    cc[ok] = (reach[ok] / dsum[ok]) * (reach[ok] / (n - 1))
    return CentralityTable(Measure.CLOSENESS, dict(zip(net.labels, cc.tolist())), True)


def clustering_coefficient(graph) -> CentralityTable:
    net = _as_network(graph)
    a = net.binary()
    deg = np.diff(a.indptr).astype(float)
    # (A @ A) restricted to edges counts common neighbours; each triangle at i is seen twice
    tri = np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2.0
    cc = np.zeros(net.n)
    ok = deg >= 2
    cc[ok] = 2.0 * tri[ok] / (deg[ok] * (deg[ok] - 1.0))
    return CentralityTable(Measure.CLUSTERING, dict(zip(net.labels, cc.tolist())), True)


def compute_measure(graph, measure: Measure | str, normalized: bool | None = None, threads: int | None = None) -> CentralityTable:
    """Dispatch on ``measure``.

    ``normalized`` applies to degree (default raw counts) and betweenness
    (default normalized); closeness and clustering are always on the unit
    scale.
    """
    m = Measure.parse(measure)
    if m is Measure.DEGREE:
        return degree_centrality(graph, normalized=bool(normalized))
    if m is Measure.WEIGHTED_DEGREE:
        return weighted_degree(graph)
    if m is Measure.BETWEENNESS:
        return betweenness_centrality(graph, normalized=normalized is not False, threads=threads)
    if m is Measure.CLOSENESS:
        return closeness_centrality(graph, threads=threads)
    return clustering_coefficient(graph)


def rank_top(table: CentralityTable, k: int) -> RankedList:
    if k < 1:
        raise ValueError("k must be a positive integer")
    rows = [(i + 1, node, value) for i, (node, value) in enumerate(table.ranked()[:k])]
    return RankedList(table.measure, rows)
