"""Command-line entry point.

All hyperparameters live in one JSON run config; flags only pick the
command, config path, variant, seed override, parallelism, and output
directory. Config schema::

    {
      "seed": 0,
      "output_dir": "runs/demo",              # optional
      "dataset": {"manifest": "path.json"}    # or {"synthetic": {...}}
      "model":   { ModelConfig fields },      # optional, defaults apply
      "train":   { TrainConfig fields },      # optional
      "eval":    {"num_folds": 5, "balance_ratio": 1.0}   # optional
    }

``dataset.synthetic`` takes the :func:`hgad.data.generate_synthetic`
arguments. Output directory resolution: ``-o`` flag, else
``output_dir`` in the config, else ``$HGAD_OUTPUT_ROOT/<config stem>``
(root defaults to the current directory).

Commands and artifacts:

* ``train``: model.ckpt, losses.csv, summary.json
* ``score``: CSV ``edge_id,raw_score,normalized_score``
* ``eval``:  report.json, scatter_fold_<k>.csv, losses_fold_<k>.csv
* ``synth``: edges.txt, features.txt, edge_labels.txt, manifest.json

The ``--variant`` switch on ``eval`` selects the method preset: ``had``
(maxmin pooling, dynamic centroid), ``had-mean`` (mean pooling), or
``had-fixed`` (frozen centroid trained for exactly 1000 epochs).
"""

import argparse
import dataclasses
import json
import os
import sys

from . import data as data_mod
from .errors import EmptyCandidate, HgadError, NodeIndexOutOfRange
from .eval import (evaluate_cv, export_score_scatter, normalize_scores,
                   write_report)
from .hypergraph import build_hypergraph, read_edge_list
from .model import ModelConfig, load_model, save_model, score_hyperedge
from .train import TrainConfig, train, write_loss_curve, write_training_summary

__all__ = ["main", "RunConfig", "VARIANTS"]

ENV_OUTPUT_ROOT = "HGAD_OUTPUT_ROOT"

# method presets: (pooling_mode, centroid_mode, fixed_epochs)
VARIANTS = {
    "had": ("maxmin", "dynamic", None),
    "had-mean": ("mean", "dynamic", None),
    "had-fixed": ("maxmin", "fixed", 1000),
}


@dataclasses.dataclass
class RunConfig:
    """Parsed run configuration; re-running it reproduces identical results."""

    seed: int = 0
    output_dir: str | None = None
    dataset: dict = dataclasses.field(default_factory=dict)
    model: ModelConfig = dataclasses.field(default_factory=ModelConfig)
    train: TrainConfig = dataclasses.field(default_factory=TrainConfig)
    num_folds: int = 5
    balance_ratio: float = 1.0

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {"seed", "output_dir", "dataset", "model", "train", "eval"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        seed = int(raw.get("seed", 0))
        tr = dict(raw.get("train", {}))
        tr.setdefault("seed", seed)
        ev = raw.get("eval", {})
        return cls(
            seed=seed,
            output_dir=raw.get("output_dir"),
            dataset=raw.get("dataset", {}),
            model=ModelConfig(**raw.get("model", {})),
            train=TrainConfig(**tr),
            num_folds=int(ev.get("num_folds", 5)),
            balance_ratio=float(ev.get("balance_ratio", 1.0)),
        )

    def apply_seed_override(self, seed: int | None) -> None:
        if seed is None:
            return
        self.seed = seed
        self.train.seed = seed

    def load_dataset(self, config_dir, allow_unlabeled=False):
        if "manifest" in self.dataset:
            path = os.path.join(config_dir, self.dataset["manifest"])
            return data_mod.load_manifest(path, allow_unlabeled=allow_unlabeled)
        if "synthetic" in self.dataset:
            params = dict(self.dataset["synthetic"])
            params.setdefault("seed", self.seed)
            return data_mod.generate_synthetic(**params)
        raise ValueError("config needs dataset.manifest or dataset.synthetic")


def _resolve_outdir(args, run: RunConfig) -> str:
    if args.out is not None:
        out = args.out
    elif run.output_dir is not None:
        out = os.path.join(os.path.dirname(os.path.abspath(args.config)),
                           run.output_dir)
    else:
        stem = os.path.splitext(os.path.basename(args.config))[0]
        out = os.path.join(os.environ.get(ENV_OUTPUT_ROOT, "."), stem)
    os.makedirs(out, exist_ok=True)
    return out


def cmd_train(args) -> int:
    run = RunConfig.from_file(args.config)
    run.apply_seed_override(args.seed)
    outdir = _resolve_outdir(args, run)
    ds = run.load_dataset(os.path.dirname(os.path.abspath(args.config)),
                          allow_unlabeled=True)
    h = ds.hypergraph
    inliers = [h.edges[i] for i in range(h.num_edges)
               if ds.labels[i] == data_mod.INLIER]
    if len(inliers) != h.num_edges:
        h = build_hypergraph(h.num_nodes, inliers, h.features)
    model, record = train(h, run.model, run.train)
    save_model(model, os.path.join(outdir, "model.ckpt"))
    write_loss_curve(record, os.path.join(outdir, "losses.csv"))
    write_training_summary(record, os.path.join(outdir, "summary.json"))
    print(f"trained on {h.num_edges} hyperedges: {record.termination_reason} "
          f"after {record.epochs_run} epochs, final loss {record.final_loss:.6g}")
    print(f"artifacts in {outdir}")
    return 0


def cmd_score(args) -> int:
    model = load_model(args.model)
    numbered = read_edge_list(args.edges, with_line_numbers=True)
    raw = []
    for line_no, edge in numbered:
        try:
            raw.append(score_hyperedge(edge, model))
        except (NodeIndexOutOfRange, EmptyCandidate) as exc:
            raise HgadError(f"{args.edges}:{line_no}: {exc}") from None
    normalized = normalize_scores(raw) if raw else []
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("edge_id,raw_score,normalized_score\n")
        for i, (r, n) in enumerate(zip(raw, normalized)):
            fh.write(f"{i},{float(r)!r},{float(n)!r}\n")
    print(f"scored {len(raw)} candidate hyperedges -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    run = RunConfig.from_file(args.config)
    run.apply_seed_override(args.seed)
    pooling, centroid, fixed = VARIANTS[args.variant]
    run.model.pooling_mode = pooling
    run.model.centroid_mode = centroid
    run.train.fixed_epochs = fixed
    outdir = _resolve_outdir(args, run)
    ds = run.load_dataset(os.path.dirname(os.path.abspath(args.config)))
    report = evaluate_cv(
        ds, run.model, run.train, run.num_folds, jobs=args.jobs,
        balance_ratio=run.balance_ratio, extra_metadata={"variant": args.variant},
    )
    write_report(report, os.path.join(outdir, "report.json"))
    for fold in report.folds:
        export_score_scatter(
            fold.scored, os.path.join(outdir, f"scatter_fold_{fold.fold_id}.csv"))
        write_loss_curve(
            fold.record, os.path.join(outdir, f"losses_fold_{fold.fold_id}.csv"))
    print(f"{ds.name} [{args.variant}] mean AUROC over {run.num_folds} folds: "
          f"{100.0 * report.mean_auroc:.2f}%")
    print(f"artifacts in {outdir}")
    return 0


def cmd_synth(args) -> int:
    run = RunConfig.from_file(args.config)
    run.apply_seed_override(args.seed)
    if "synthetic" not in run.dataset:
        raise ValueError("synth needs dataset.synthetic in the config")
    outdir = _resolve_outdir(args, run)
    ds = run.load_dataset(os.path.dirname(os.path.abspath(args.config)))
    manifest = data_mod.save_dataset(ds, outdir)
    print(f"wrote {ds.hypergraph.num_edges} hyperedges "
          f"({ds.num_anomalies} anomalies) -> {manifest}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hgad", description="Hyperedge anomaly detection toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model from a run config")
    p_train.add_argument("-c", "--config", required=True)
    p_train.add_argument("-o", "--out", default=None, help="output directory")
    p_train.add_argument("--seed", type=int, default=None)
    p_train.set_defaults(func=cmd_train)

    p_score = sub.add_parser("score", help="score candidate hyperedges")
    p_score.add_argument("-m", "--model", required=True, help="model checkpoint")
    p_score.add_argument("-e", "--edges", required=True, help="candidate edge list")
    p_score.add_argument("-o", "--out", default="scores.csv")
    p_score.set_defaults(func=cmd_score)

    p_eval = sub.add_parser("eval", help="cross-validated AUROC evaluation")
    p_eval.add_argument("-c", "--config", required=True)
    p_eval.add_argument("-o", "--out", default=None, help="output directory")
    p_eval.add_argument("--variant", choices=sorted(VARIANTS), default="had")
    p_eval.add_argument("--jobs", type=int, default=1, help="parallel folds")
    p_eval.add_argument("--seed", type=int, default=None)
    p_eval.set_defaults(func=cmd_eval)

    p_synth = sub.add_parser("synth", help="emit a generated dataset to files")
    p_synth.add_argument("-c", "--config", required=True)
    p_synth.add_argument("-o", "--out", default=None, help="output directory")
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HgadError, OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
