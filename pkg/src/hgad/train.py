"""Full-batch training loop with loss-threshold early stopping.

Every epoch runs one forward over all hyperedges, checks the stop
condition against the loss of that forward (before any update), then
backpropagates and applies one optimizer step. Dynamic-centroid runs
stop once loss <= ``loss_threshold`` (the hypersphere-collapse guard);
``fixed_epochs`` disables the threshold and runs an exact number of
steps instead; ``max_epochs`` caps runs that never cross the threshold.
"""

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteLoss
from .hypergraph import Hypergraph
from .model import ModelConfig, TrainedModel, backward, forward, init_parameters
from .nn import OptimizerState, optimizer_step, zero_grads

__all__ = [
    "TrainConfig",
    "TrainingRecord",
    "train",
    "write_loss_curve",
    "write_training_summary",
]

TERMINATION_REASONS = ("threshold_reached", "epoch_cap", "fixed_epochs_done")


@dataclass
class TrainConfig:
    """Loop and optimizer hyperparameters.

    ``fixed_epochs`` switches to the fixed-step protocol (exactly that
    many optimizer steps, loss threshold ignored).
    """

    loss_threshold: float = 1e-4
    max_epochs: int = 10_000
    fixed_epochs: int | None = None
    seed: int = 0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    loss_log_interval: int = 50

    def validate(self) -> None:
        if self.loss_threshold <= 0:
            raise ValueError("loss_threshold must be > 0")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.fixed_epochs is not None and self.fixed_epochs < 0:
            raise ValueError("fixed_epochs must be >= 0")
        if self.loss_log_interval < 1:
            raise ValueError("loss_log_interval must be >= 1")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class TrainingRecord:
    """Loss trajectory and how the loop ended.

    ``losses`` holds ``(epoch, loss)`` at every ``loss_log_interval``-th
    epoch plus always the terminal epoch; ``epochs_run`` counts optimizer
    steps actually applied.
    """

    losses: list = field(default_factory=list)
    termination_reason: str = ""
    epochs_run: int = 0
    final_loss: float = math.nan
    wall_clock_seconds: float = 0.0

    def loss_at(self, epoch: int) -> float:
        for e, loss in self.losses:
            if e == epoch:
                return loss
        raise KeyError(f"epoch {epoch} was not logged")


def train(h: Hypergraph, cfg: ModelConfig, tcfg: TrainConfig) -> tuple[TrainedModel, TrainingRecord]:
    """Run the training loop; returns the final embeddings/centroid and record.

    The returned model carries the node embeddings and centroid of the
    final forward pass (the one whose loss triggered termination), so in
    dynamic mode the centroid equals the mean of the final pooled
    embeddings by construction.
    """
    cfg.validate()
    tcfg.validate()
    start = time.perf_counter()

    params = init_parameters(cfg, h.feature_dim, tcfg.seed)
    opt = OptimizerState.for_store(
        params, learning_rate=tcfg.learning_rate,
        beta1=tcfg.beta1, beta2=tcfg.beta2, eps=tcfg.eps,
    )
    step_limit = tcfg.fixed_epochs if tcfg.fixed_epochs is not None else tcfg.max_epochs
    record = TrainingRecord()
    frozen_centroid = None

    epoch = 0
    while True:
        trace = forward(h, params, cfg, frozen_centroid=frozen_centroid)
        if cfg.centroid_mode == "fixed" and frozen_centroid is None:
            # epoch-0 centroid, frozen for the rest of the run
            frozen_centroid = trace.centroid.copy()
        if not math.isfinite(trace.loss):
            raise NonFiniteLoss(
                f"loss became {trace.loss} at epoch {epoch} "
                f"(seed={tcfg.seed}, lr={tcfg.learning_rate})"
            )
        if epoch % tcfg.loss_log_interval == 0:
            record.losses.append((epoch, trace.loss))

        if tcfg.fixed_epochs is None and trace.loss <= tcfg.loss_threshold:
            reason = "threshold_reached"
        elif epoch >= step_limit:
            reason = "fixed_epochs_done" if tcfg.fixed_epochs is not None else "epoch_cap"
        else:
            backward(h, params, cfg, trace)
            optimizer_step(params, opt)
            zero_grads(params)
            epoch += 1
            continue

        if not record.losses or record.losses[-1][0] != epoch:
            record.losses.append((epoch, trace.loss))
        record.termination_reason = reason
        record.epochs_run = epoch
        record.final_loss = trace.loss
        record.wall_clock_seconds = time.perf_counter() - start
        model = TrainedModel(
            node_embeddings=trace.node_embeddings[-1].copy(),
            centroid=np.asarray(trace.centroid, dtype=np.float64).copy(),
            pooling_mode=cfg.pooling_mode,
        )
        return model, record


def write_loss_curve(record: TrainingRecord, path) -> None:
    """CSV ``epoch,loss`` at the logged epochs."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,loss\n")
        for epoch, loss in record.losses:
            fh.write(f"{epoch},{loss!r}\n")


def write_training_summary(record: TrainingRecord, path) -> None:
    summary = {
        "epochs_run": record.epochs_run,
        "termination_reason": record.termination_reason,
        "final_loss": record.final_loss,
        "wall_clock_seconds": record.wall_clock_seconds,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
