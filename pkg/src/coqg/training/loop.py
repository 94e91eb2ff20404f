"""Mini-batch training with gradient clipping and validation-NLL selection."""

from __future__ import annotations

import copy
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import torch

from ..model.indexing import IndexedExample
from ..model.network import QuestionGenerator
from .losses import joint_loss, nll_loss

LOG_COLUMNS = ["epoch", "nll", "coref", "flow", "total", "val_nll"]


@dataclass
class TrainingConfig:
    epochs: int = 10
    batch_size: int = 16
    learning_rate: float = 1e-3
    grad_clip: float = 5.0
    optimizer: str = "adam"  # or "sgd"
    shuffle: bool = True
    nll_stop: float | None = None  # stop early once train NLL drops below


@dataclass
class TrainResult:
    model: QuestionGenerator
    log: list[dict] = field(default_factory=list)
    best_val_nll: float = math.inf
    diverged: bool = False
    diagnostics: dict = field(default_factory=dict)


def _make_optimizer(model: QuestionGenerator, cfg: TrainingConfig) -> torch.optim.Optimizer:
    if cfg.optimizer == "adam":
        return torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    if cfg.optimizer == "sgd":
        return torch.optim.SGD(model.parameters(), lr=cfg.learning_rate)
    raise ValueError(f"unknown optimizer {cfg.optimizer!r}")


def validation_nll(model: QuestionGenerator, examples: list[IndexedExample]) -> float:
    if not examples:
        return math.nan
    was_training = model.training
    model.eval()
    total = 0.0
    with torch.no_grad():
        for ex in examples:
            dists, _ = model(ex)
            total += float(nll_loss(dists, ex.target_out_ids))
    if was_training:
        model.train()
    return total / len(examples)


def train(
    model: QuestionGenerator,
    train_set: list[IndexedExample],
    val_set: list[IndexedExample] | None = None,
    cfg: TrainingConfig | None = None,
) -> TrainResult:
    """Teacher-forced training; keeps the parameters that minimize validation
    NLL (train NLL when no validation set is given).  A non-finite batch loss
    aborts before the optimizer step, so the model keeps its last good
    parameters."""
    cfg = cfg or TrainingConfig()
    if not train_set:
        raise ValueError("empty training set")
    torch.manual_seed(model.config.seed)
    rng = random.Random(model.config.seed)
    optimizer = _make_optimizer(model, cfg)
    result = TrainResult(model=model)
    diagnostics: dict = {}
    best_state = None
    best_val = math.inf
    # divergence rollback point, refreshed after every finished epoch
    last_good = copy.deepcopy(model.state_dict())

    model.train()
    for epoch in range(1, cfg.epochs + 1):
        order = list(range(len(train_set)))
        if cfg.shuffle:
            rng.shuffle(order)
        sums = {"nll": 0.0, "coref": 0.0, "flow": 0.0, "total": 0.0}
        count = 0
        for start in range(0, len(order), cfg.batch_size):
            batch = [train_set[i] for i in order[start : start + cfg.batch_size]]
            optimizer.zero_grad()
            batch_loss = None
            for ex in batch:
                dists, atts = model(ex)
                breakdown = joint_loss(dists, atts, ex, model.config, diagnostics)
                piece = breakdown.total / len(batch)
                batch_loss = piece if batch_loss is None else batch_loss + piece
                for key, value in breakdown.floats().items():
                    sums[key] += value
                count += 1
            if not torch.isfinite(batch_loss):
                result.diverged = True
                result.diagnostics = diagnostics
                result.best_val_nll = best_val
                model.load_state_dict(best_state if best_state is not None else last_good)
                model.eval()
                return result
            batch_loss.backward()
            if cfg.grad_clip > 0:
                torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.grad_clip)
            optimizer.step()

        last_good = copy.deepcopy(model.state_dict())
        means = {k: v / count for k, v in sums.items()}
        val_nll = validation_nll(model, val_set) if val_set else means["nll"]
        result.log.append({"epoch": epoch, **means, "val_nll": val_nll})
        if not math.isnan(val_nll) and val_nll < best_val:
            best_val = val_nll
            best_state = copy.deepcopy(model.state_dict())
        if cfg.nll_stop is not None and means["nll"] < cfg.nll_stop:
            break

    if best_state is not None:
        model.load_state_dict(best_state)
    result.best_val_nll = best_val
    result.diagnostics = diagnostics
    model.eval()
    return result


def write_training_log(path: str | Path, rows: list[dict]) -> None:
    from ..corpus.io import write_atomic_text

    lines = [",".join(LOG_COLUMNS)]
    for row in rows:
        lines.append(",".join(f"{row[c]:.6f}" if c != "epoch" else str(row[c]) for c in LOG_COLUMNS))
    write_atomic_text(path, "\n".join(lines) + "\n")
