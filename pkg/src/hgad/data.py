"""Dataset ingestion, label rules, CV splits, and synthetic data.

Labels are per-hyperedge ints: 0 = inlier, 1 = anomaly. On-disk formats
(all text, ``#`` comments allowed):

* node-label file: ``node_index class_id`` per line, every node covered.
* edge-label file: ``edge_index {0|1}`` per line (1 = anomaly), every
  hyperedge covered.
* manifest JSON naming the component files::

      {"name": "...", "edges": "edges.txt",
       "features": "features.txt", "feature_format": "dense",
       "edge_labels": "edge_labels.txt", "node_labels": "node_labels.txt"}

  ``features``/labels entries are optional; paths are relative to the
  manifest. Without ``features`` every node gets a one-hot identity row
  (feature_dim = num_nodes). Without any label source loading fails
  unless ``allow_unlabeled`` is set, in which case every edge counts as
  an inlier.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import MissingLabels, ParseError, TooFewInliers
from .hypergraph import (Hypergraph, build_hypergraph, read_edge_list,
                         read_features, write_edge_list, write_features)

__all__ = [
    "INLIER",
    "ANOMALY",
    "LabeledHypergraphDataset",
    "EvalSplit",
    "load_dataset",
    "load_manifest",
    "save_dataset",
    "derive_labels",
    "make_splits",
    "generate_synthetic",
    "read_node_labels",
    "read_edge_labels",
    "write_edge_labels",
    "convert_mushroom",
]

INLIER = 0
ANOMALY = 1


@dataclass
class LabeledHypergraphDataset:
    """A hypergraph plus one 0/1 label per hyperedge (1 = anomaly)."""

    hypergraph: Hypergraph
    labels: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape != (self.hypergraph.num_edges,):
            raise ValueError(
                f"{self.labels.size} labels for {self.hypergraph.num_edges} hyperedges"
            )
        if self.labels.size and not np.any(self.labels == INLIER):
            raise ValueError("dataset has no inlier hyperedges")
        if self.labels.size and not np.isin(self.labels, (INLIER, ANOMALY)).all():
            raise ValueError("labels must be 0 (inlier) or 1 (anomaly)")

    @property
    def num_inliers(self) -> int:
        return int(np.sum(self.labels == INLIER))

    @property
    def num_anomalies(self) -> int:
        return int(np.sum(self.labels == ANOMALY))


@dataclass
class EvalSplit:
    """One cross-validation fold.

    ``train_edges`` are inlier edge indices; ``test_edges`` is a multiset
    of edge indices (held-out inliers drawn with replacement, then every
    anomaly once) aligned with ``test_labels``.
    """

    fold_id: int
    seed: int
    train_edges: np.ndarray
    test_edges: np.ndarray
    test_labels: np.ndarray


def read_node_labels(path, num_nodes: int) -> np.ndarray:
    labels = np.full(num_nodes, -1, dtype=np.int64)
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise ParseError(path, line_no, "expected 'node_index class_id'")
            try:
                node, cls = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ParseError(path, line_no, f"bad integer: {exc}") from None
            if not 0 <= node < num_nodes:
                raise ParseError(path, line_no, f"node index {node} out of range")
            labels[node] = cls
    missing = np.flatnonzero(labels < 0)
    if missing.size:
        raise ParseError(path, 0, f"no label for node {int(missing[0])} "
                                  f"({missing.size} nodes unlabeled)")
    return labels


def read_edge_labels(path, num_edges: int) -> np.ndarray:
    labels = np.full(num_edges, -1, dtype=np.int64)
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2 or parts[1] not in ("0", "1"):
                raise ParseError(path, line_no, "expected 'edge_index {0|1}'")
            try:
                edge = int(parts[0])
            except ValueError as exc:
                raise ParseError(path, line_no, f"bad integer: {exc}") from None
            if not 0 <= edge < num_edges:
                raise ParseError(path, line_no, f"edge index {edge} out of range")
            labels[edge] = int(parts[1])
    missing = np.flatnonzero(labels < 0)
    if missing.size:
        raise ParseError(path, 0, f"no label for hyperedge {int(missing[0])} "
                                  f"({missing.size} hyperedges unlabeled)")
    return labels


def write_edge_labels(path, labels) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, lab in enumerate(np.asarray(labels, dtype=np.int64)):
            fh.write(f"{i} {int(lab)}\n")


def derive_labels(h: Hypergraph, node_labels) -> np.ndarray:
    """Label hyperedges from node classes.

    The globally most frequent node class wins (ties to the lowest class
    id); a hyperedge is an inlier iff it contains at least one node of
    that class, an anomaly otherwise.
    """
    node_labels = np.asarray(node_labels, dtype=np.int64)
    if node_labels.shape != (h.num_nodes,):
        raise ValueError(f"need {h.num_nodes} node labels, got {node_labels.size}")
    classes, counts = np.unique(node_labels, return_counts=True)
    top = classes[np.argmax(counts)]  # unique() sorts, so ties pick the lowest id
    return np.array(
        [INLIER if np.any(node_labels[e] == top) else ANOMALY for e in h.edges],
        dtype=np.int64,
    )


def load_dataset(edge_file, feature_file=None, label_file=None,
                 node_label_file=None, *, feature_format: str = "dense",
                 name: str | None = None,
                 allow_unlabeled: bool = False) -> LabeledHypergraphDataset:
    """Build a labeled dataset from the documented text files.

    Precedence: explicit edge labels > labels derived from node labels.
    Without a feature file, nodes get one-hot identity features.
    """
    raw_edges = read_edge_list(edge_file)
    if feature_file is not None:
        features = read_features(feature_file, feature_format)
        num_nodes = features.shape[0]
    else:
        num_nodes = 1 + max((max(e) for e in raw_edges if e), default=-1)
        features = np.eye(num_nodes)
    h = build_hypergraph(num_nodes, raw_edges, features)

    if label_file is not None:
        labels = read_edge_labels(label_file, h.num_edges)
    elif node_label_file is not None:
        labels = derive_labels(h, read_node_labels(node_label_file, h.num_nodes))
    elif allow_unlabeled:
        labels = np.zeros(h.num_edges, dtype=np.int64)
    else:
        raise MissingLabels(
            "no edge-label or node-label file given "
            "(pass allow_unlabeled=True to treat every hyperedge as an inlier)"
        )
    if name is None:
        name = os.path.splitext(os.path.basename(str(edge_file)))[0]
    return LabeledHypergraphDataset(h, labels, name)


def load_manifest(path, allow_unlabeled: bool = False) -> LabeledHypergraphDataset:
    """Load a dataset through its manifest JSON."""
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    base = os.path.dirname(os.path.abspath(str(path)))

    def resolve(key):
        rel = manifest.get(key)
        return os.path.join(base, rel) if rel else None

    return load_dataset(
        resolve("edges"),
        feature_file=resolve("features"),
        label_file=resolve("edge_labels"),
        node_label_file=resolve("node_labels"),
        feature_format=manifest.get("feature_format", "dense"),
        name=manifest.get("name"),
        allow_unlabeled=allow_unlabeled,
    )


def save_dataset(ds: LabeledHypergraphDataset, out_dir,
                 include_features: bool = True) -> str:
    """Write edges/features/labels plus a manifest; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    manifest = {"name": ds.name, "edges": "edges.txt", "edge_labels": "edge_labels.txt"}
    write_edge_list(os.path.join(out_dir, "edges.txt"), ds.hypergraph.edge_lists())
    write_edge_labels(os.path.join(out_dir, "edge_labels.txt"), ds.labels)
    if include_features:
        write_features(os.path.join(out_dir, "features.txt"), ds.hypergraph.features)
        manifest["features"] = "features.txt"
        manifest["feature_format"] = "dense"
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path


def make_splits(ds: LabeledHypergraphDataset, num_folds: int, seed: int,
                balance_ratio: float = 1.0) -> list[EvalSplit]:
    """Seeded k-fold splits over the inliers with oversampled test inliers.

    Inlier indices are shuffled and partitioned into ``num_folds``
    near-equal folds; fold k trains on the other folds' inliers and is
    tested on its own held-out inliers, drawn with replacement until
    their count is ``balance_ratio`` times the anomaly count, plus every
    anomaly exactly once.
    """
    if num_folds < 2:
        raise ValueError("num_folds must be >= 2")
    inliers = np.flatnonzero(ds.labels == INLIER)
    anomalies = np.flatnonzero(ds.labels == ANOMALY)
    if inliers.size < num_folds:
        raise TooFewInliers(
            f"{inliers.size} inliers cannot fill {num_folds} folds"
        )
    shuffled = np.random.default_rng(seed).permutation(inliers)
    folds = np.array_split(shuffled, num_folds)

    splits = []
    target = int(round(balance_ratio * anomalies.size))
    for k, held_out in enumerate(folds):
        train = np.sort(np.concatenate([folds[j] for j in range(num_folds) if j != k]))
        fold_rng = np.random.default_rng([seed, k])
        sampled = (fold_rng.choice(held_out, size=target, replace=True)
                   if target > 0 else np.empty(0, dtype=np.int64))
        test_edges = np.concatenate([sampled, anomalies]).astype(np.int64)
        test_labels = np.concatenate([
            np.full(sampled.size, INLIER, dtype=np.int64),
            np.full(anomalies.size, ANOMALY, dtype=np.int64),
        ])
        splits.append(EvalSplit(fold_id=k, seed=seed, train_edges=train,
                                test_edges=test_edges, test_labels=test_labels))
    return splits


def generate_synthetic(num_clusters: int, nodes_per_cluster: int, feature_dim: int,
                       num_inlier_edges: int, num_anomaly_edges: int,
                       edge_size: int, noise_sigma: float, seed: int,
                       separation: float = 4.0) -> LabeledHypergraphDataset:
    """Planted-anomaly generator.

    Node features are a well-separated cluster mean (scaled one-hot
    directions, ``separation`` apart) plus Gaussian noise. Each inlier
    edge holds ``edge_size`` nodes of a single random cluster; each
    anomaly edge spans two clusters, so anomalies carry high within-edge
    feature diversity, the exact signal maxmin pooling measures. Inlier
    edges are drawn batch-wise as random disjoint partitions of one
    cluster, keeping node degrees near-uniform: with unnormalized sum
    aggregation, degree imbalance would swamp the planted diversity
    signal with mean-magnitude variance. Inlier edges come first in the
    edge list.
    """
    if min(num_clusters, nodes_per_cluster, feature_dim, edge_size) < 1:
        raise ValueError("sizes must be positive")
    if num_inlier_edges < 0 or num_anomaly_edges < 0:
        raise ValueError("edge counts must be >= 0")
    if edge_size > nodes_per_cluster:
        raise ValueError("edge_size cannot exceed nodes_per_cluster")
    if num_anomaly_edges > 0 and (num_clusters < 2 or edge_size < 2):
        raise ValueError("anomaly edges need >= 2 clusters and edge_size >= 2")

    rng = np.random.default_rng(seed)
    num_nodes = num_clusters * nodes_per_cluster
    means = np.zeros((num_clusters, feature_dim))
    for c in range(num_clusters):
        # cycle through axes, stepping the scale up on each wrap
        means[c, c % feature_dim] = separation * (1 + c // feature_dim)
    clusters = np.repeat(np.arange(num_clusters), nodes_per_cluster)
    features = means[clusters] + noise_sigma * rng.standard_normal((num_nodes, feature_dim))
    members = [np.flatnonzero(clusters == c) for c in range(num_clusters)]

    edges = []
    per_batch = nodes_per_cluster // edge_size
    while len(edges) < num_inlier_edges:
        c = int(rng.integers(num_clusters))
        perm = rng.permutation(members[c])
        for b in range(min(per_batch, num_inlier_edges - len(edges))):
            edges.append(perm[b * edge_size:(b + 1) * edge_size])
    for _ in range(num_anomaly_edges):
        c1, c2 = rng.choice(num_clusters, size=2, replace=False)
        take = int(rng.integers(1, edge_size))  # at least one node from each side
        edges.append(np.concatenate([
            rng.choice(members[c1], size=take, replace=False),
            rng.choice(members[c2], size=edge_size - take, replace=False),
        ]))

    labels = np.concatenate([
        np.full(num_inlier_edges, INLIER, dtype=np.int64),
        np.full(num_anomaly_edges, ANOMALY, dtype=np.int64),
    ])
    h = build_hypergraph(num_nodes, edges, features)
    return LabeledHypergraphDataset(h, labels, name=f"synthetic-{seed}")


def convert_mushroom(raw_path, name: str = "mushroom") -> LabeledHypergraphDataset:
    """Convert the UCI mushroom CSV (`agaricus-lepiota.data`).

    Each distinct (attribute, value) pair becomes a node (ids assigned in
    sorted order, missing '?' treated as a value of its own); each
    species row becomes the hyperedge of its 22 attribute-value nodes.
    Edible rows are inliers, poisonous rows anomalies. Features are
    one-hot identities.
    """
    rows = []
    with open(raw_path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split(",")
            if len(parts) < 2:
                raise ParseError(raw_path, line_no, "expected 'class,attr,...'")
            if parts[0] not in ("e", "p"):
                raise ParseError(raw_path, line_no, f"unknown class {parts[0]!r}")
            rows.append(parts)

    pairs = sorted({(a, val) for parts in rows
                    for a, val in enumerate(parts[1:])})
    node_id = {pair: i for i, pair in enumerate(pairs)}
    edges = [[node_id[(a, val)] for a, val in enumerate(parts[1:])]
             for parts in rows]
    labels = np.array([INLIER if parts[0] == "e" else ANOMALY for parts in rows],
                      dtype=np.int64)
    h = build_hypergraph(len(pairs), edges, np.eye(len(pairs)))
    return LabeledHypergraphDataset(h, labels, name=name)
