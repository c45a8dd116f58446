"""IPC co-occurrence network construction and edge-list serialization."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .corpus import PatentCorpus, PatentRecord
from .errors import EmptyCorpus, LevelUnavailable
from .ipc import IpcCode, IpcLevel, format_ipc, parse_ipc, truncate


def record_codes_at(record: PatentRecord, level: IpcLevel) -> list[IpcCode]:
    """Distinct codes of ``record`` truncated to ``level``, sorted.

    Codes shallower than ``level`` are dropped.
    """
    out = set()
    for code in record.codes:
        try:
            out.add(truncate(code, level))
        except LevelUnavailable:
            continue
    return sorted(out)


@dataclass(frozen=True)
class CooccurrenceGraph:
    level: IpcLevel
    nodes: frozenset[IpcCode]
    edges: Mapping[tuple[IpcCode, IpcCode], int]
    patent_count: int
    skipped_records: int = 0
    _order: tuple[IpcCode, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_order", tuple(sorted(self.nodes)))
        for (u, v), w in self.edges.items():
            if not u < v:
                raise ValueError(f"edge key {u}-{v} is not in canonical order")
            if u not in self.nodes or v not in self.nodes:
                raise ValueError(f"edge {u}-{v} has an endpoint outside the node set")
            if w < 1:
                raise ValueError(f"edge {u}-{v} has non-positive weight {w}")

    @property
    def node_order(self) -> tuple[IpcCode, ...]:
        """Nodes sorted by their text form; row/column order of matrix views."""
        return self._order

    def weight(self, u: IpcCode, v: IpcCode) -> int:
        if u == v:
            return 0
        key = (u, v) if u < v else (v, u)
        return self.edges.get(key, 0)

    def adjacency_matrix(self, weighted: bool = False) -> sp.csr_matrix:
        """Symmetric CSR matrix in :attr:`node_order` with a zero diagonal."""
        n = len(self._order)
        index = {node: i for i, node in enumerate(self._order)}
        m = len(self.edges)
        rows = np.empty(2 * m, dtype=np.int64)
        cols = np.empty(2 * m, dtype=np.int64)
        data = np.empty(2 * m, dtype=np.float64)
        for k, ((u, v), w) in enumerate(sorted(self.edges.items())):
            i, j = index[u], index[v]
            rows[2 * k], cols[2 * k] = i, j
            rows[2 * k + 1], cols[2 * k + 1] = j, i
            data[2 * k] = data[2 * k + 1] = w if weighted else 1.0
        mat = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        mat.sort_indices()
        return mat


def build_cooccurrence(corpus: PatentCorpus, level: IpcLevel = IpcLevel.SUBCLASS) -> CooccurrenceGraph:
    """Count, for each pair of distinct technology codes, the patents listing both."""
    if not len(corpus):
        raise EmptyCorpus("cannot build a co-occurrence graph from an empty corpus")
    nodes: set[IpcCode] = set()
    edges: Counter = Counter()
    used = skipped = 0
    for rec in corpus:
        codes = record_codes_at(rec, level)
        if not codes:
            skipped += 1
            continue
        used += 1
        nodes.update(codes)
        edges.update(combinations(codes, 2))
    return CooccurrenceGraph(
        level=level,
        nodes=frozenset(nodes),
        edges=dict(edges),
        patent_count=used,
        skipped_records=skipped,
    )


def binary_adjacency(graph: CooccurrenceGraph) -> sp.csr_matrix:
    """0/1 adjacency: an entry is 1 exactly when the pair co-occurs at least once."""
    return graph.adjacency_matrix(weighted=False)


def export_edges(graph: CooccurrenceGraph) -> str:
    lines = sorted(
        f"{format_ipc(u)}\t{format_ipc(v)}\t{w}"
        for (u, v), w in graph.edges.items()
    )
    return "".join(line + "\n" for line in lines)


def import_edges(text: str) -> dict[tuple[IpcCode, IpcCode], int]:
    """Read an edge list written by :func:`export_edges`."""
    edges: dict[tuple[IpcCode, IpcCode], int] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 3 tab-separated fields")
        u, v = parse_ipc(parts[0]), parse_ipc(parts[1])
        key = (u, v) if u < v else (v, u)
        edges[key] = edges.get(key, 0) + int(parts[2])
    return edges
