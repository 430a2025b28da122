"""Unsupervised hyperedge anomaly detection on attributed hypergraphs.

Train a two-stage message-passing network on the hyperedges of a
hypergraph (all presumed normal), pool each hyperedge's final node
embeddings with an elementwise max-minus-min (capturing within-edge
diversity), and score any candidate node subset by the Euclidean
distance of its pooled embedding from the centroid of the training
edges. Includes the full evaluation protocol: inlier-only k-fold splits
with oversampled test inliers and exact AUROC.
"""

from . import errors
from .data import (ANOMALY, INLIER, EvalSplit, LabeledHypergraphDataset,
                   derive_labels, generate_synthetic, load_dataset,
                   load_manifest, make_splits, save_dataset)
from .estimator import HyperedgeAnomalyDetector
from .eval import (EvalReport, ScoredTestSet, auroc, evaluate_cv,
                   export_score_scatter, normalize_scores, write_report)
from .hypergraph import (Hypergraph, IncidenceView, build_hypergraph,
                         edge_sum_aggregate, node_sum_aggregate)
from .model import (ForwardTrace, ModelConfig, TrainedModel, backward,
                    compute_centroid, forward, init_parameters, load_model,
                    save_model, score_hyperedge, score_hyperedges)
from .nn import (AffineLayer, OptimizerState, ParameterStore, affine_backward,
                 affine_forward, build_parameter_store, load_params,
                 optimizer_step, save_params, zero_grads)
from .train import TrainConfig, TrainingRecord, train

__version__ = "0.1.0"

__all__ = [
    "errors",
    "Hypergraph", "IncidenceView", "build_hypergraph",
    "edge_sum_aggregate", "node_sum_aggregate",
    "AffineLayer", "ParameterStore", "OptimizerState",
    "affine_forward", "affine_backward", "zero_grads", "optimizer_step",
    "build_parameter_store", "save_params", "load_params",
    "ModelConfig", "ForwardTrace", "TrainedModel", "init_parameters",
    "forward", "backward", "compute_centroid",
    "score_hyperedge", "score_hyperedges", "save_model", "load_model",
    "TrainConfig", "TrainingRecord", "train",
    "INLIER", "ANOMALY", "LabeledHypergraphDataset", "EvalSplit",
    "load_dataset", "load_manifest", "save_dataset", "derive_labels",
    "make_splits", "generate_synthetic",
    "auroc", "normalize_scores", "ScoredTestSet", "EvalReport",
    "evaluate_cv", "export_score_scatter", "write_report",
    "HyperedgeAnomalyDetector",
]
