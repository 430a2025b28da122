"""The anomaly-detection network.

Forward pass per layer l = 1..L-1 (two-stage message passing):

    Z_E^l = ENN^l( sum of member-node rows of Z_V^{l-1} )
    Z_V^l = VNN^l( sum of incident-edge rows of Z_E^l )

with Z_V^0 = VNN^0(X). The final hyperedge embedding pools the last node
embeddings over each edge's members, by default elementwise max minus
elementwise min (the within-edge diversity signal); the one-class head
scores an edge by its Euclidean distance to the centroid (mean of all
pooled training-edge embeddings) and the loss is the mean score.

``backward`` propagates the exact gradient of that mean-distance loss:
the norm contributes ``(Z_e - C) / max(score, 1e-12)`` per edge (zero at
the cone tip), a dynamic centroid is differentiated through as the mean,
maxmin pooling routes +grad to the argmax node and -grad to the argmin
node per dimension (ties to the lowest node index), and the two
aggregations transpose into each other.
"""

from dataclasses import dataclass

import numpy as np

from ._binio import read_container, write_container
from .errors import DimensionMismatch, EmptyEdgeSet, TraceMismatch
from .hypergraph import Hypergraph, edge_sum_aggregate, node_sum_aggregate
from .nn import (AffineLayer, ParameterStore, affine_backward, affine_forward,
                 build_parameter_store)
from .validation import as_candidate_edge, as_float_matrix

__all__ = [
    "ModelConfig",
    "ForwardTrace",
    "TrainedModel",
    "init_parameters",
    "forward",
    "backward",
    "compute_centroid",
    "score_hyperedge",
    "score_hyperedges",
    "save_model",
    "load_model",
]

POOLING_MODES = ("maxmin", "mean")
CENTROID_MODES = ("dynamic", "fixed")

# subgradient guard for the Euclidean norm at zero distance
EPS_NORM = 1e-12


@dataclass
class ModelConfig:
    """Architecture and head configuration.

    ``pooling_mode='mean'`` and ``centroid_mode='fixed'`` reproduce the
    two ablation variants; ``detach_centroid`` keeps the centroid dynamic
    in the forward pass but blocks gradient flow through it.
    """

    num_layers: int = 2
    hidden_dim: int = 64
    embedding_dim: int = 64
    pooling_mode: str = "maxmin"
    centroid_mode: str = "dynamic"
    mlp_depth: int = 1
    detach_centroid: bool = False
    activation: str = "identity"

    def validate(self) -> None:
        if self.num_layers < 1:
            raise ValueError("num_layers must be >= 1")
        if min(self.hidden_dim, self.embedding_dim, self.mlp_depth) < 1:
            raise ValueError("dims and mlp_depth must be >= 1")
        if self.pooling_mode not in POOLING_MODES:
            raise ValueError(f"pooling_mode must be one of {POOLING_MODES}")
        if self.centroid_mode not in CENTROID_MODES:
            raise ValueError(f"centroid_mode must be one of {CENTROID_MODES}")
        if self.activation not in ("relu", "identity"):
            raise ValueError("activation must be 'relu' or 'identity'")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def init_parameters(cfg: ModelConfig, feature_dim: int, seed: int = 0) -> ParameterStore:
    """Seeded parameter store whose dimensions chain with ``cfg``."""
    cfg.validate()
    return build_parameter_store(
        feature_dim, cfg.hidden_dim, cfg.embedding_dim, cfg.num_layers,
        cfg.mlp_depth, seed, cfg.activation,
    )


@dataclass
class ForwardTrace:
    """Everything one forward pass computed, retained for backward."""

    node_embeddings: list          # Z_V^0 .. Z_V^{L-1}
    edge_embeddings: list          # Z_E^1 .. Z_E^{L-1}
    vnn_io: list                   # per VNN stack: [(input, output), ...]
    enn_io: list                   # per ENN stack: [(input, output), ...]
    pooled: np.ndarray             # |E| x embedding_dim
    argmax_nodes: np.ndarray | None
    argmin_nodes: np.ndarray | None
    centroid: np.ndarray
    centroid_is_frozen: bool
    scores: np.ndarray
    loss: float
    params_version: int
    num_nodes: int
    num_edges: int


@dataclass
class TrainedModel:
    """Final node embeddings plus centroid; all that scoring needs."""

    node_embeddings: np.ndarray    # |V| x embedding_dim
    centroid: np.ndarray           # embedding_dim
    pooling_mode: str = "maxmin"

    @property
    def num_nodes(self) -> int:
        return self.node_embeddings.shape[0]

    @property
    def embedding_dim(self) -> int:
        return self.node_embeddings.shape[1]


def compute_centroid(edge_embeddings) -> np.ndarray:
    """Arithmetic mean of the hyperedge embedding rows."""
    m = as_float_matrix(edge_embeddings, "edge_embeddings")
    if m.shape[0] == 0:
        raise EmptyEdgeSet("cannot take the centroid of zero hyperedges")
    return m.mean(axis=0)


def _stack_forward(stack: list[AffineLayer], x: np.ndarray, io: list) -> np.ndarray:
    for layer in stack:
        out = affine_forward(layer, x)
        io.append((x, out))
        x = out
    return x


def _stack_backward(stack: list[AffineLayer], io: list, g: np.ndarray) -> np.ndarray:
    for layer, (inp, out) in zip(reversed(stack), reversed(io)):
        g = affine_backward(layer, inp, g, output=out)
    return g


def _pool(h: Hypergraph, emb: np.ndarray, mode: str):
    """Pool final node embeddings per edge; returns (pooled, amax, amin).

    ``amax``/``amin`` are |E| x dim arrays of global node indices (None
    for mean pooling). Extremum ties resolve to the lowest node index.
    """
    k = emb.shape[1]
    if h.num_edges == 0:
        return np.zeros((0, k)), None, None
    gathered = emb[h.edge_nodes]
    starts = h.edge_indptr[:-1]
    sizes = h.edge_sizes
    if mode == "mean":
        pooled = np.add.reduceat(gathered, starts, axis=0) / sizes[:, None]
        return pooled, None, None
    mx = np.maximum.reduceat(gathered, starts, axis=0)
    mn = np.minimum.reduceat(gathered, starts, axis=0)
    nnz = gathered.shape[0]
    pos = np.arange(nnz, dtype=np.int64)[:, None]
    # first flat position attaining each extremum; edges store nodes
    # ascending, so "first" is the lowest node index
    first_max = np.minimum.reduceat(
        np.where(gathered == np.repeat(mx, sizes, axis=0), pos, nnz), starts, axis=0)
    first_min = np.minimum.reduceat(
        np.where(gathered == np.repeat(mn, sizes, axis=0), pos, nnz), starts, axis=0)
    if np.isnan(mx).any():
        # NaN never equals its own maximum; clamp so the forward finishes
        # and the training loop can raise NonFiniteLoss with diagnostics
        np.minimum(first_max, nnz - 1, out=first_max)
        np.minimum(first_min, nnz - 1, out=first_min)
    return mx - mn, h.edge_nodes[first_max], h.edge_nodes[first_min]


def forward(h: Hypergraph, params: ParameterStore, cfg: ModelConfig,
            frozen_centroid: np.ndarray | None = None) -> ForwardTrace:
    """Full forward pass over all hyperedges of ``h``.

    ``frozen_centroid`` overrides the dynamically computed centroid (used
    by fixed-centroid training after epoch 0).
    """
    cfg.validate()
    if params.input_dim != h.feature_dim:
        raise DimensionMismatch(
            f"features have dim {h.feature_dim}, network expects {params.input_dim}"
        )
    if params.num_layers != cfg.num_layers or params.embedding_dim != cfg.embedding_dim:
        raise DimensionMismatch("parameter store does not match the model config")

    vnn_io: list = [[] for _ in range(cfg.num_layers)]
    enn_io: list = [[] for _ in range(cfg.num_layers - 1)]

    zv = [_stack_forward(params.vnn[0], h.features, vnn_io[0])]
    ze = []
    for l in range(1, cfg.num_layers):
        agg_e = edge_sum_aggregate(h, zv[l - 1])
        ze.append(_stack_forward(params.enn[l - 1], agg_e, enn_io[l - 1]))
        agg_v = node_sum_aggregate(h, ze[-1])
        zv.append(_stack_forward(params.vnn[l], agg_v, vnn_io[l]))

    pooled, amax, amin = _pool(h, zv[-1], cfg.pooling_mode)
    dynamic_centroid = compute_centroid(pooled)
    if frozen_centroid is not None:
        centroid = np.asarray(frozen_centroid, dtype=np.float64)
        frozen = True
    else:
        centroid = dynamic_centroid
        frozen = False
    diffs = pooled - centroid
    scores = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
    loss = float(scores.mean())

    return ForwardTrace(
        node_embeddings=zv, edge_embeddings=ze, vnn_io=vnn_io, enn_io=enn_io,
        pooled=pooled, argmax_nodes=amax, argmin_nodes=amin,
        centroid=centroid, centroid_is_frozen=frozen,
        scores=scores, loss=loss, params_version=params.version,
        num_nodes=h.num_nodes, num_edges=h.num_edges,
    )


def backward(h: Hypergraph, params: ParameterStore, cfg: ModelConfig,
             trace: ForwardTrace) -> None:
    """Accumulate d(loss)/d(parameters) into the store's gradient buffers."""
    if trace.params_version != params.version:
        raise TraceMismatch(
            f"trace was built at parameter version {trace.params_version}, "
            f"store is now at {params.version}"
        )
    if trace.num_nodes != h.num_nodes or trace.num_edges != h.num_edges:
        raise TraceMismatch("trace does not belong to this hypergraph")

    m = trace.num_edges
    diffs = trace.pooled - trace.centroid
    denom = np.maximum(trace.scores, EPS_NORM)
    g_pooled = diffs / (m * denom[:, None])
    centroid_flows = (cfg.centroid_mode == "dynamic"
                      and not cfg.detach_centroid
                      and not trace.centroid_is_frozen)
    if centroid_flows:
        g_pooled = g_pooled - g_pooled.mean(axis=0)

    # route through the pooling into the final node embeddings
    dim = trace.pooled.shape[1]
    g_nodes = np.zeros((h.num_nodes, dim))
    if cfg.pooling_mode == "maxmin":
        cols = np.tile(np.arange(dim), m)
        np.add.at(g_nodes, (trace.argmax_nodes.ravel(), cols), g_pooled.ravel())
        np.subtract.at(g_nodes, (trace.argmin_nodes.ravel(), cols), g_pooled.ravel())
    else:
        per_member = np.repeat(g_pooled / h.edge_sizes[:, None], h.edge_sizes, axis=0)
        np.add.at(g_nodes, h.edge_nodes, per_member)

    g = g_nodes
    for l in range(cfg.num_layers - 1, 0, -1):
        g = _stack_backward(params.vnn[l], trace.vnn_io[l], g)
        g = edge_sum_aggregate(h, g)          # transpose of node_sum_aggregate
        g = _stack_backward(params.enn[l - 1], trace.enn_io[l - 1], g)
        g = node_sum_aggregate(h, g)          # transpose of edge_sum_aggregate
    _stack_backward(params.vnn[0], trace.vnn_io[0], g)


def _pool_rows(rows: np.ndarray, mode: str) -> np.ndarray:
    if mode == "mean":
        return rows.mean(axis=0)
    return rows.max(axis=0) - rows.min(axis=0)


def score_hyperedge(edge, model: TrainedModel) -> float:
    """Anomaly score of one candidate hyperedge (not necessarily trained on).

    Pools the member nodes' final embeddings and returns the Euclidean
    distance to the centroid. Higher means more anomalous.
    """
    idx = as_candidate_edge(edge, model.num_nodes)
    pooled = _pool_rows(model.node_embeddings[idx], model.pooling_mode)
    diff = pooled - model.centroid
    # same reduction as the batched forward, so trained-edge scores match
    # the final training trace exactly
    return float(np.sqrt(np.einsum("i,i->", diff, diff)))


def score_hyperedges(edges, model: TrainedModel) -> np.ndarray:
    """Vector of :func:`score_hyperedge` values, in input order."""
    return np.array([score_hyperedge(e, model) for e in edges])


def save_model(model: TrainedModel, path) -> None:
    """Write the versioned model file (bitwise round-trip)."""
    meta = {
        "num_nodes": model.num_nodes,
        "embedding_dim": model.embedding_dim,
        "pooling_mode": model.pooling_mode,
    }
    write_container(path, "model", meta, [
        ("node_embeddings", model.node_embeddings),
        ("centroid", model.centroid),
    ])


def load_model(path) -> TrainedModel:
    meta, arrays = read_container(path, "model")
    model = TrainedModel(
        node_embeddings=arrays["node_embeddings"],
        centroid=arrays["centroid"],
        pooling_mode=meta["pooling_mode"],
    )
    if model.num_nodes != meta["num_nodes"]:
        raise ValueError(f"{path}: corrupt model file (node count mismatch)")
    return model
