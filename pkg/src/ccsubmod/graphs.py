"""Undirected graph loading and closed-neighborhood coverage.

Graphs come from plain edge lists or Matrix-Market coordinate files (the
formats used by the network data repository). Node ids are normalized to
0-based indices. Each node's closed neighborhood (the node plus its
neighbors) is precomputed as a packed 64-bit bitset row so that the coverage
value of a selection is one OR-reduction plus a popcount.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["Graph", "GraphFormatError", "load_graph", "save_edge_list", "coverage_count"]


class GraphFormatError(ValueError):
    """Raised for malformed graph files (non-integer tokens, bad ids)."""


_COMMENT_PREFIXES = ("%", "#")


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph with precomputed closed-neighborhood bitsets.

    Attributes:
        n: number of nodes (0-based ids 0..n-1; isolated trailing nodes are
           retained when declared by a size header).
        adjacency: per-node sorted arrays of neighbor ids (no self loops).
        degrees: per-node degree, ``len(adjacency[v])``.
        closed_bits: uint64 array of shape (n, ceil(n/64)); row v has bit u
            set iff u == v or {u, v} is an edge.
    """

    n: int
    adjacency: tuple[np.ndarray, ...]
    degrees: np.ndarray
    closed_bits: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges: np.ndarray) -> "Graph":
        """Build a graph from 0-based edge pairs.

        Duplicate edges (in either orientation) and self loops are dropped.
        ``n`` may exceed the largest id to keep isolated trailing nodes.
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise GraphFormatError("edge endpoint out of range")
        u = np.minimum(edges[:, 0], edges[:, 1])
        v = np.maximum(edges[:, 0], edges[:, 1])
        keep = u != v
        u, v = u[keep], v[keep]
        if u.size:
            canon = np.unique(u * np.int64(n) + v)
            u, v = canon // n, canon % n
        both_src = np.concatenate([u, v])
        both_dst = np.concatenate([v, u])
        order = np.lexsort((both_dst, both_src))
        both_src, both_dst = both_src[order], both_dst[order]
        counts = np.bincount(both_src, minlength=n)
        both_dst.setflags(write=False)
        adjacency = tuple(np.split(both_dst, np.cumsum(counts)[:-1]))
        degrees = counts.astype(np.int64)

        words = (n + 63) // 64
        closed = np.zeros((n, words), dtype=np.uint64)
        rows = np.concatenate([np.arange(n, dtype=np.int64), both_src])
        cols = np.concatenate([np.arange(n, dtype=np.int64), both_dst])
        np.bitwise_or.at(
            closed,
            (rows, cols >> 6),
            np.uint64(1) << (cols & 63).astype(np.uint64),
        )
        closed.setflags(write=False)
        degrees.setflags(write=False)
        return cls(n=n, adjacency=adjacency, degrees=degrees, closed_bits=closed)

    @property
    def num_edges(self) -> int:
        return int(self.degrees.sum()) // 2

    def edge_array(self) -> np.ndarray:
        """All edges as (m, 2) array with u < v, sorted lexicographically."""
        out = []
        for u, nbrs in enumerate(self.adjacency):
            higher = nbrs[nbrs > u]
            if higher.size:
                out.append(np.column_stack([np.full(higher.size, u, dtype=np.int64), higher]))
        if not out:
            return np.empty((0, 2), dtype=np.int64)
        return np.concatenate(out)

    def closed_neighborhood(self, v: int) -> np.ndarray:
        """Sorted node ids of v's closed neighborhood ({v} plus neighbors)."""
        return np.union1d(np.array([v], dtype=np.int64), self.adjacency[v])


def _parse_pairs(path: Path) -> tuple[list[tuple[int, int]], int | None, bool]:
    """Read integer pair lines; returns (pairs, declared size or None, is_mm)."""
    pairs: list[tuple[int, int]] = []
    declared: int | None = None
    is_mm = False
    first_data = True
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith(_COMMENT_PREFIXES):
                if lineno == 1 and line.lower().startswith("%%matrixmarket"):
                    is_mm = True
                continue
            tokens = line.split()
            try:
                values = [int(t) for t in tokens]
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: non-integer token in {line!r}") from exc
            if first_data and len(values) == 3:
                # Matrix-Market size header "rows cols nnz"; also accepted on
                # plain lists whose first data line declares the node count.
                declared = max(values[0], values[1])
                first_data = False
                continue
            first_data = False
            if len(values) < 2:
                raise GraphFormatError(f"{path}:{lineno}: expected an integer pair, got {line!r}")
            # Coordinate files may carry a value column; ignore anything past u v.
            pairs.append((values[0], values[1]))
    return pairs, declared, is_mm


def load_graph(path: str | Path, format: str = "auto") -> Graph:
    """Load an undirected graph from an edge-list or Matrix-Market file.

    ``format`` is one of ``"matrix-market"``, ``"edge-list"``, ``"auto"``.
    Matrix-Market ids are 1-based; plain lists are sniffed (an id 0 anywhere
    means 0-based). Comment lines start with '%' or '#'. Self loops are
    dropped, duplicate edges are merged, and the node count is
    ``max(declared header size, largest id + 1)`` so that isolated trailing
    nodes declared by the header survive.
    """
    path = Path(path)
    if format not in ("auto", "matrix-market", "edge-list"):
        raise ValueError(f"unknown graph format {format!r}")
    pairs, declared, saw_banner = _parse_pairs(path)
    if format == "matrix-market":
        one_based = True
    elif format == "edge-list":
        one_based = not any(u == 0 or v == 0 for u, v in pairs)
    else:
        if saw_banner or path.suffix.lower() == ".mtx":
            one_based = True
        else:
            one_based = not any(u == 0 or v == 0 for u, v in pairs)

    if pairs:
        edges = np.asarray(pairs, dtype=np.int64)
        if one_based:
            edges = edges - 1
        if edges.min() < 0:
            raise GraphFormatError(f"{path}: node id below the indexing base")
        max_id = int(edges.max())
    else:
        edges = np.empty((0, 2), dtype=np.int64)
        max_id = -1
    n = max(declared or 0, max_id + 1)
    if n == 0:
        raise GraphFormatError(f"{path}: no nodes (empty file without size header)")
    return Graph.from_edges(n, edges)


def save_edge_list(graph: Graph, path: str | Path) -> None:
    """Write the graph so that :func:`load_graph` round-trips it exactly.

    A ``.mtx`` destination gets a Matrix-Market pattern header with 1-based
    ids; anything else gets an ``n n m`` size line plus 0-based pairs. The
    size header keeps isolated trailing nodes alive either way.
    """
    path = Path(path)
    edges = graph.edge_array()
    offset = 1 if path.suffix.lower() == ".mtx" else 0
    with open(path, "w", encoding="utf-8") as fh:
        if offset:
            fh.write("%%MatrixMarket matrix coordinate pattern symmetric\n")
        fh.write(f"{graph.n} {graph.n} {len(edges)}\n")
        for u, v in edges:
            fh.write(f"{u + offset} {v + offset}\n")


def coverage_count(graph: Graph, selection: np.ndarray) -> int:
    """Number of nodes covered by a selection: |union of closed neighborhoods|.

    ``selection`` is a 0/1 (or boolean) vector of length ``graph.n``. The
    result is 0 for the empty selection and is monotone submodular in the
    selected set.
    """
    selection = np.asarray(selection)
    if selection.shape != (graph.n,):
        raise ValueError(f"selection length {selection.shape} != graph size {graph.n}")
    idx = np.flatnonzero(selection)
    return coverage_of_indices(graph, idx)


def coverage_of_indices(graph: Graph, idx: np.ndarray) -> int:
    """Coverage value for an explicit array of selected node ids."""
    if len(idx) == 0:
        return 0
    agg = np.bitwise_or.reduce(graph.closed_bits[idx], axis=0)
    return int(np.bitwise_count(agg).sum())
