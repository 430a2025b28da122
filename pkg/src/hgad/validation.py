"""Input validation helpers shared by the public entry points."""

import numpy as np

from .errors import DimensionMismatch, EmptyCandidate, EmptyEdge, NodeIndexOutOfRange


def as_float_matrix(value, name: str) -> np.ndarray:
    """Coerce ``value`` to a C-contiguous 2-D float64 array."""
    arr = np.ascontiguousarray(value, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def check_rows(matrix: np.ndarray, expected: int, name: str) -> None:
    if matrix.shape[0] != expected:
        raise DimensionMismatch(
            f"{name} has {matrix.shape[0]} rows, expected {expected}"
        )


def as_node_index_set(raw_edge, num_nodes: int, *, empty_error=EmptyEdge) -> np.ndarray:
    """Normalize one hyperedge: dedup, sort ascending, bounds-check.

    Input multiplicity is discarded (hyperedges are node sets). Raises
    ``empty_error`` when nothing remains and :class:`NodeIndexOutOfRange`
    for indices outside ``[0, num_nodes)``.
    """
    idx = np.unique(np.asarray(list(raw_edge), dtype=np.int64))
    if idx.size == 0:
        raise empty_error("hyperedge has no nodes")
    if idx[0] < 0 or idx[-1] >= num_nodes:
        bad = int(idx[0]) if idx[0] < 0 else int(idx[-1])
        raise NodeIndexOutOfRange(
            f"node index {bad} outside [0, {num_nodes})"
        )
    return idx


def as_candidate_edge(raw_edge, num_nodes: int) -> np.ndarray:
    """Like :func:`as_node_index_set` but raising :class:`EmptyCandidate`."""
    return as_node_index_set(raw_edge, num_nodes, empty_error=EmptyCandidate)
