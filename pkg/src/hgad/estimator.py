"""scikit-learn style estimator facade over the functional core.

The detector follows the usual conventions: constructor arguments are
stored verbatim (so ``get_params``/``set_params``/``clone`` work), state
learned by ``fit`` lives in trailing-underscore attributes, and ``fit``
returns ``self``. Scores follow the anomaly-detection convention that
higher means more anomalous.
"""

from sklearn.base import BaseEstimator

from .data import INLIER, LabeledHypergraphDataset
from .hypergraph import Hypergraph, build_hypergraph
from .model import ModelConfig, score_hyperedge, score_hyperedges
from .train import TrainConfig, train

__all__ = ["HyperedgeAnomalyDetector"]


class HyperedgeAnomalyDetector(BaseEstimator):
    """Unsupervised one-class detector for anomalous hyperedges.

    Fit on a hypergraph whose hyperedges are presumed normal; score any
    candidate node subset by the distance of its pooled embedding from
    the training centroid.

    Parameters mirror :class:`hgad.model.ModelConfig` and
    :class:`hgad.train.TrainConfig`.

    Examples
    --------
    >>> det = HyperedgeAnomalyDetector(hidden_dim=16, embedding_dim=16)
    >>> det.fit(hypergraph)                      # doctest: +SKIP
    >>> det.decision_function([[0, 1, 5], [2, 7]])   # doctest: +SKIP
    array([0.031..., 1.442...])
    """

    def __init__(self, num_layers=2, hidden_dim=64, embedding_dim=64,
                 pooling_mode="maxmin", centroid_mode="dynamic", mlp_depth=1,
                 detach_centroid=False, activation="identity",
                 loss_threshold=1e-4, max_epochs=10_000, fixed_epochs=None,
                 learning_rate=1e-3, loss_log_interval=50, seed=0):
        self.num_layers = num_layers
        self.hidden_dim = hidden_dim
        self.embedding_dim = embedding_dim
        self.pooling_mode = pooling_mode
        self.centroid_mode = centroid_mode
        self.mlp_depth = mlp_depth
        self.detach_centroid = detach_centroid
        self.activation = activation
        self.loss_threshold = loss_threshold
        self.max_epochs = max_epochs
        self.fixed_epochs = fixed_epochs
        self.learning_rate = learning_rate
        self.loss_log_interval = loss_log_interval
        self.seed = seed

    def _configs(self) -> tuple[ModelConfig, TrainConfig]:
        cfg = ModelConfig(
            num_layers=self.num_layers, hidden_dim=self.hidden_dim,
            embedding_dim=self.embedding_dim, pooling_mode=self.pooling_mode,
            centroid_mode=self.centroid_mode, mlp_depth=self.mlp_depth,
            detach_centroid=self.detach_centroid, activation=self.activation,
        )
        tcfg = TrainConfig(
            loss_threshold=self.loss_threshold, max_epochs=self.max_epochs,
            fixed_epochs=self.fixed_epochs, seed=self.seed,
            learning_rate=self.learning_rate,
            loss_log_interval=self.loss_log_interval,
        )
        return cfg, tcfg

    def fit(self, X, y=None):
        """Train on a :class:`Hypergraph` (all edges treated as inliers)
        or a :class:`LabeledHypergraphDataset` (inlier edges only)."""
        if isinstance(X, LabeledHypergraphDataset):
            h = X.hypergraph
            keep = [h.edges[i] for i in range(h.num_edges) if X.labels[i] == INLIER]
            h = build_hypergraph(h.num_nodes, keep, h.features)
        elif isinstance(X, Hypergraph):
            h = X
        else:
            raise TypeError(
                "fit expects a Hypergraph or LabeledHypergraphDataset, "
                f"got {type(X).__name__}"
            )
        cfg, tcfg = self._configs()
        self.model_, self.record_ = train(h, cfg, tcfg)
        self.node_embeddings_ = self.model_.node_embeddings
        self.centroid_ = self.model_.centroid
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise RuntimeError("this detector is not fitted yet; call fit first")

    def decision_function(self, edges):
        """Anomaly scores for candidate hyperedges (higher = more anomalous).

        ``edges`` is an iterable of node-index collections; candidates
        need not have been seen during fit.
        """
        self._check_fitted()
        return score_hyperedges(edges, self.model_)

    def score_edge(self, edge) -> float:
        """Anomaly score of a single candidate hyperedge."""
        self._check_fitted()
        return score_hyperedge(edge, self.model_)
