"""Hypergraph data model and sparse incidence aggregation.

A hypergraph is a node set ``{0..num_nodes-1}``, an ordered list of
hyperedges (each a sorted, duplicate-free array of node indices) and a
dense per-node feature matrix. The ``|E| x |V|`` 0/1 incidence matrix is
kept as a logical view over the edge list and is never materialized
densely; both aggregation directions (edge <- nodes and node <- edges)
run off flat CSR-style index arrays.

Text formats (also used by :mod:`hgad.data`):

* hyperedge list: one hyperedge per line, whitespace-separated 0-based
  node indices; lines starting with ``#`` are comments. A line with no
  indices is an error.
* dense features: header line ``num_nodes feature_dim`` followed by one
  row of space-separated decimal floats per node.
* sparse features: same header, then lines ``node_index dim_index value``;
  unlisted entries are zero.
"""

import numpy as np

from .errors import FeatureRowMismatch, ParseError
from .validation import as_float_matrix, as_node_index_set, check_rows

__all__ = [
    "Hypergraph",
    "IncidenceView",
    "build_hypergraph",
    "edge_sum_aggregate",
    "node_sum_aggregate",
    "read_edge_list",
    "write_edge_list",
    "read_features",
    "write_features",
]


class IncidenceView:
    """Logical ``|E| x |V|`` 0/1 incidence matrix.

    Exposes the nonzero pattern through iteration; entry ``(i, j)`` is 1
    iff node ``j`` belongs to hyperedge ``i``.
    """

    def __init__(self, hypergraph: "Hypergraph"):
        self._h = hypergraph

    @property
    def shape(self) -> tuple[int, int]:
        return (self._h.num_edges, self._h.num_nodes)

    @property
    def nnz(self) -> int:
        return int(self._h.edge_nodes.size)

    def __iter__(self):
        """Yield ``(edge_index, node_index)`` for every nonzero entry."""
        indptr = self._h.edge_indptr
        nodes = self._h.edge_nodes
        for i in range(self._h.num_edges):
            for j in nodes[indptr[i]:indptr[i + 1]]:
                yield (i, int(j))

    def __contains__(self, entry) -> bool:
        i, j = entry
        if not (0 <= i < self._h.num_edges):
            return False
        edge = self._h.edges[i]
        pos = int(np.searchsorted(edge, j))
        return pos < edge.size and edge[pos] == j


class Hypergraph:
    """Immutable hypergraph with features; construct via :func:`build_hypergraph`.

    Attributes
    ----------
    num_nodes : int
    edges : list[np.ndarray]
        Sorted, duplicate-free int64 node-index arrays, one per hyperedge.
    features : np.ndarray
        ``num_nodes x feature_dim`` float64 matrix (read-only).
    node_to_edges : list[np.ndarray]
        For each node, the sorted edge indices containing it.
    """

    def __init__(self, num_nodes, edges, features, node_to_edges,
                 edge_indptr, edge_nodes, node_indptr, node_edges):
        self.num_nodes = num_nodes
        self.edges = edges
        self.features = features
        self.node_to_edges = node_to_edges
        # flat CSR arrays backing the aggregation kernels
        self.edge_indptr = edge_indptr
        self.edge_nodes = edge_nodes
        self.node_indptr = node_indptr
        self.node_edges = node_edges
        for arr in (features, edge_indptr, edge_nodes, node_indptr, node_edges):
            arr.setflags(write=False)
        for arr in edges:
            arr.setflags(write=False)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def edge_sizes(self) -> np.ndarray:
        return np.diff(self.edge_indptr)

    @property
    def incidence(self) -> IncidenceView:
        return IncidenceView(self)

    def edge_lists(self) -> list[list[int]]:
        """Edges as plain lists of ints (for export and round-trips)."""
        return [e.tolist() for e in self.edges]

    def __repr__(self):
        return (f"Hypergraph(num_nodes={self.num_nodes}, "
                f"num_edges={self.num_edges}, feature_dim={self.feature_dim})")


def build_hypergraph(num_nodes: int, raw_edges, features) -> Hypergraph:
    """Validate and construct a :class:`Hypergraph`.

    Duplicate node indices inside an edge are discarded and indices are
    sorted ascending. ``features`` must supply one row per node.

    Raises
    ------
    EmptyEdge, NodeIndexOutOfRange, FeatureRowMismatch
    """
    num_nodes = int(num_nodes)
    if num_nodes < 0:
        raise ValueError("num_nodes must be >= 0")
    # copy so freezing the write flag never touches the caller's array
    feats = as_float_matrix(features, "features").copy()
    if feats.shape[0] != num_nodes:
        raise FeatureRowMismatch(
            f"features has {feats.shape[0]} rows for {num_nodes} nodes"
        )

    edges = [as_node_index_set(raw, num_nodes) for raw in raw_edges]

    edge_sizes = np.array([e.size for e in edges], dtype=np.int64)
    edge_indptr = np.zeros(len(edges) + 1, dtype=np.int64)
    np.cumsum(edge_sizes, out=edge_indptr[1:])
    edge_nodes = (np.concatenate(edges) if edges
                  else np.empty(0, dtype=np.int64))

    # transpose: for each node, the sorted edge ids that contain it
    member_counts = np.bincount(edge_nodes, minlength=num_nodes)
    node_indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(member_counts, out=node_indptr[1:])
    node_edges = np.empty(edge_nodes.size, dtype=np.int64)
    cursor = node_indptr[:-1].copy()
    for i, e in enumerate(edges):
        node_edges[cursor[e]] = i  # edge ids arrive in increasing order
        cursor[e] += 1
    node_to_edges = [node_edges[node_indptr[v]:node_indptr[v + 1]]
                     for v in range(num_nodes)]

    return Hypergraph(num_nodes, edges, feats, node_to_edges,
                      edge_indptr, edge_nodes, node_indptr, node_edges)


def edge_sum_aggregate(h: Hypergraph, node_matrix) -> np.ndarray:
    """Sum node rows into hyperedges: row ``i`` = sum of rows of ``edges[i]``.

    This is the incidence product ``A_H @ node_matrix``, unnormalized.
    """
    m = as_float_matrix(node_matrix, "node_matrix")
    check_rows(m, h.num_nodes, "node_matrix")
    if h.num_edges == 0:
        return np.zeros((0, m.shape[1]))
    gathered = m[h.edge_nodes]
    # every edge is nonempty, so each reduceat segment is valid
    return np.add.reduceat(gathered, h.edge_indptr[:-1], axis=0)


def node_sum_aggregate(h: Hypergraph, edge_matrix) -> np.ndarray:
    """Sum hyperedge rows into nodes: row ``v`` = sum over edges containing v.

    This is ``A_H.T @ edge_matrix``; nodes in no hyperedge get a zero row.
    """
    m = as_float_matrix(edge_matrix, "edge_matrix")
    check_rows(m, h.num_edges, "edge_matrix")
    out = np.zeros((h.num_nodes, m.shape[1]))
    if h.node_edges.size == 0:
        return out
    covered = np.flatnonzero(np.diff(h.node_indptr) > 0)
    gathered = m[h.node_edges]
    out[covered] = np.add.reduceat(gathered, h.node_indptr[covered], axis=0)
    return out


def read_edge_list(path, with_line_numbers: bool = False):
    """Parse the hyperedge-list text format. Raises :class:`ParseError`.

    With ``with_line_numbers`` each item is ``(line_no, edge)`` so callers
    can point errors back at the source line.
    """
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if stripped.startswith("#"):
                continue
            if not stripped:
                raise ParseError(path, line_no, "empty hyperedge line")
            try:
                edge = [int(tok) for tok in stripped.split()]
            except ValueError as exc:
                raise ParseError(path, line_no, f"bad node index: {exc}") from None
            edges.append((line_no, edge) if with_line_numbers else edge)
    return edges


def write_edge_list(path, edges) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for edge in edges:
            fh.write(" ".join(str(int(v)) for v in edge) + "\n")


def read_features(path, fmt: str = "dense") -> np.ndarray:
    """Read a feature matrix in the ``dense`` or ``sparse`` text format."""
    if fmt not in ("dense", "sparse"):
        raise ValueError(f"unknown feature format {fmt!r}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()

    data_lines = [(no, ln.strip()) for no, ln in enumerate(lines, start=1)
                  if ln.strip() and not ln.strip().startswith("#")]
    if not data_lines:
        raise ParseError(path, 1, "missing 'num_nodes feature_dim' header")
    head_no, head = data_lines[0]
    parts = head.split()
    if len(parts) != 2:
        raise ParseError(path, head_no, "header must be 'num_nodes feature_dim'")
    try:
        num_nodes, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(path, head_no, "non-integer header") from None
    if num_nodes < 0 or dim < 1:
        raise ParseError(path, head_no, "header values out of range")

    out = np.zeros((num_nodes, dim))
    body = data_lines[1:]
    if fmt == "dense":
        if len(body) != num_nodes:
            raise ParseError(path, head_no,
                             f"expected {num_nodes} rows, found {len(body)}")
        for row, (no, ln) in enumerate(body):
            vals = ln.split()
            if len(vals) != dim:
                raise ParseError(path, no, f"expected {dim} values, found {len(vals)}")
            try:
                out[row] = [float(v) for v in vals]
            except ValueError as exc:
                raise ParseError(path, no, f"bad float: {exc}") from None
    else:
        for no, ln in body:
            vals = ln.split()
            if len(vals) != 3:
                raise ParseError(path, no, "expected 'node_index dim_index value'")
            try:
                node, d, val = int(vals[0]), int(vals[1]), float(vals[2])
            except ValueError as exc:
                raise ParseError(path, no, f"bad entry: {exc}") from None
            if not (0 <= node < num_nodes and 0 <= d < dim):
                raise ParseError(path, no, "entry index out of range")
            out[node, d] = val
    return out


def write_features(path, features) -> None:
    """Write a dense feature file; values round-trip exactly via repr."""
    feats = as_float_matrix(features, "features")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{feats.shape[0]} {feats.shape[1]}\n")
        for row in feats:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
