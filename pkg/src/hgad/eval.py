"""Scoring of test sets, exact AUROC, cross-validation, and exports.

AUROC here is the exact Mann-Whitney statistic: the probability that a
random anomaly outscores a random inlier, ties counted half, computed
via rank sums with average ranks. Raw anomaly scores are unbounded
distances; ``normalize_scores`` maps them monotonically into [0, 1]
(AUROC is invariant under that map, so ranking semantics never change).
"""

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import ANOMALY, INLIER, EvalSplit, LabeledHypergraphDataset, make_splits
from .errors import SingleClassOnly
from .hypergraph import build_hypergraph
from .model import ModelConfig, score_hyperedges
from .train import TrainConfig, TrainingRecord, train

__all__ = [
    "auroc",
    "normalize_scores",
    "ScoredTestSet",
    "FoldResult",
    "EvalReport",
    "evaluate_cv",
    "export_score_scatter",
    "report_to_dict",
    "write_report",
    "config_hash",
]

REPORT_SCHEMA_VERSION = 1


def auroc(scores, labels) -> float:
    """Exact AUROC of anomaly (label 1) over inlier (label 0) scores.

    Computed from rank sums with average ranks for ties, which equals
    ``P(score_anomaly > score_inlier) + 0.5 * P(equal)``.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    is_anomaly = np.asarray(labels).ravel() == ANOMALY
    if scores.shape != is_anomaly.shape:
        raise ValueError("scores and labels must have equal length")
    n_anom = int(is_anomaly.sum())
    n_inl = scores.size - n_anom
    if n_anom == 0 or n_inl == 0:
        raise SingleClassOnly(
            f"need both classes, got {n_anom} anomalies / {n_inl} inliers"
        )
    s_sorted = np.sort(scores)
    lo = np.searchsorted(s_sorted, scores, side="left")
    hi = np.searchsorted(s_sorted, scores, side="right")
    avg_ranks = (lo + hi + 1) / 2.0  # 1-based midrank
    u = avg_ranks[is_anomaly].sum() - n_anom * (n_anom + 1) / 2.0
    return float(u / (n_anom * n_inl))


def normalize_scores(raw) -> np.ndarray:
    """Min-max map onto [0, 1]; a constant vector maps to all zeros."""
    raw = np.asarray(raw, dtype=np.float64).ravel()
    if raw.size == 0:
        raise ValueError("no scores to normalize")
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        return np.zeros_like(raw)
    return (raw - lo) / (hi - lo)


@dataclass
class ScoredTestSet:
    """Scores for one fold's test multiset (parallel arrays)."""

    edge_ids: np.ndarray
    raw_scores: np.ndarray
    normalized_scores: np.ndarray
    labels: np.ndarray


@dataclass
class FoldResult:
    fold_id: int
    auroc: float
    scored: ScoredTestSet
    num_train_edges: int
    record: TrainingRecord


@dataclass
class EvalReport:
    fold_aurocs: list
    mean_auroc: float
    folds: list
    metadata: dict = field(default_factory=dict)


def config_hash(*objs) -> str:
    """Stable sha256 over canonical-JSON dumps of the given dicts."""
    blob = json.dumps(objs, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _run_fold(ds: LabeledHypergraphDataset, cfg: ModelConfig, tcfg: TrainConfig,
              split: EvalSplit) -> FoldResult:
    h = ds.hypergraph
    # training hypergraph: same node universe and features, inlier edges only
    sub = build_hypergraph(
        h.num_nodes, [h.edges[i] for i in split.train_edges], h.features)
    model, record = train(sub, cfg, tcfg)
    raw = score_hyperedges([h.edges[i] for i in split.test_edges], model)
    fold_auroc = auroc(raw, split.test_labels)  # raises before normalization can
    scored = ScoredTestSet(
        edge_ids=split.test_edges.copy(),
        raw_scores=raw,
        normalized_scores=normalize_scores(raw),
        labels=split.test_labels.copy(),
    )
    return FoldResult(
        fold_id=split.fold_id,
        auroc=fold_auroc,
        scored=scored,
        num_train_edges=int(split.train_edges.size),
        record=record,
    )


def _run_fold_args(args):
    return _run_fold(*args)


def evaluate_cv(ds: LabeledHypergraphDataset, cfg: ModelConfig, tcfg: TrainConfig,
                num_folds: int = 5, *, jobs: int = 1, balance_ratio: float = 1.0,
                extra_metadata: dict | None = None) -> EvalReport:
    """Seeded k-fold cross-validation; mean AUROC over the folds.

    Each fold trains only on its training inliers (the hypergraph
    restricted to those edges, node set and features untouched) and
    scores its oversampled test multiset. ``jobs > 1`` runs folds in
    worker processes; results are combined in fold order either way.
    """
    start = time.perf_counter()
    splits = make_splits(ds, num_folds, tcfg.seed, balance_ratio=balance_ratio)
    fold_args = [(ds, cfg, tcfg, split) for split in splits]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            folds = list(pool.map(_run_fold_args, fold_args))
    else:
        folds = [_run_fold(*args) for args in fold_args]
    folds.sort(key=lambda f: f.fold_id)

    fold_aurocs = [f.auroc for f in folds]
    metadata = {
        "dataset": ds.name,
        "num_nodes": ds.hypergraph.num_nodes,
        "num_edges": ds.hypergraph.num_edges,
        "num_inliers": ds.num_inliers,
        "num_anomalies": ds.num_anomalies,
        "num_folds": num_folds,
        "balance_ratio": balance_ratio,
        "seed": tcfg.seed,
        "model_config": cfg.to_dict(),
        "train_config": tcfg.to_dict(),
        "config_hash": config_hash(cfg.to_dict(), tcfg.to_dict(),
                                   {"num_folds": num_folds,
                                    "balance_ratio": balance_ratio}),
        "wall_clock_seconds": time.perf_counter() - start,
    }
    if extra_metadata:
        metadata.update(extra_metadata)
    return EvalReport(
        fold_aurocs=fold_aurocs,
        mean_auroc=float(np.mean(fold_aurocs)),
        folds=folds,
        metadata=metadata,
    )


def _score_summary(scored: ScoredTestSet, which: int) -> dict:
    mask = scored.labels == which
    if not mask.any():
        return {"count": 0}
    vals = scored.raw_scores[mask]
    return {"count": int(mask.sum()), "mean": float(vals.mean()),
            "min": float(vals.min()), "max": float(vals.max())}


def report_to_dict(report: EvalReport) -> dict:
    """The versioned report schema written by :func:`write_report`."""
    return {
        "version": REPORT_SCHEMA_VERSION,
        "mean_auroc": report.mean_auroc,
        "fold_aurocs": report.fold_aurocs,
        "folds": [
            {
                "fold_id": f.fold_id,
                "auroc": f.auroc,
                "num_train_edges": f.num_train_edges,
                "num_test_entries": int(f.scored.labels.size),
                "epochs_run": f.record.epochs_run,
                "termination_reason": f.record.termination_reason,
                "final_loss": f.record.final_loss,
                "scores_inlier": _score_summary(f.scored, INLIER),
                "scores_anomaly": _score_summary(f.scored, ANOMALY),
            }
            for f in report.folds
        ],
        "metadata": report.metadata,
    }


def write_report(report: EvalReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def export_score_scatter(scored: ScoredTestSet, path) -> None:
    """CSV ``index,score,label`` (normalized scores), one test entry per row."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,score,label\n")
        for i, (s, lab) in enumerate(zip(scored.normalized_scores, scored.labels)):
            fh.write(f"{i},{float(s)!r},{int(lab)}\n")
