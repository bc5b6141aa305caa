"""Training loop: Adam, per-style hyperparameters, early stopping.

Style defaults follow the upstream experiment settings: alarm-style data
trains with batch 32, learning rate 2.5e-4, L2 1e-6; rhythm-style data with
batch 16, learning rate 1e-3, L2 1e-7.  The epoch budget is 100 with early
stopping (patience 10 on validation loss).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .data import Normalizer, classes_for_style, padded_batch, replicate_balanced
from .matrices import LoadedMatrix
from .model import BiLstmClassifier

STYLE_DEFAULTS = {
    "alarm2015": {"batch_size": 32, "learning_rate": 2.5e-4, "l2": 1e-6},
    "afib2017": {"batch_size": 16, "learning_rate": 1e-3, "l2": 1e-7},
}


@dataclass
class TrainConfig:
    dataset_style: str = "afib2017"
    batch_size: int | None = None
    learning_rate: float | None = None
    l2: float | None = None
    epochs: int = 100
    patience: int = 10
    seed: int = 0
    augment: bool = False

    def __post_init__(self):
        if self.dataset_style not in STYLE_DEFAULTS:
            raise ValueError(f"unknown dataset style {self.dataset_style!r}")
        defaults = STYLE_DEFAULTS[self.dataset_style]
        if self.batch_size is None:
            self.batch_size = defaults["batch_size"]
        if self.learning_rate is None:
            self.learning_rate = defaults["learning_rate"]
        if self.l2 is None:
            self.l2 = defaults["l2"]


@dataclass
class FoldResult:
    model: BiLstmClassifier
    normalizer: Normalizer
    classes: tuple[str, ...]
    curve: list[dict] = field(default_factory=list)

    @property
    def best_val_accuracy(self) -> float:
        return max(p["val_accuracy"] for p in self.curve)


def _evaluate(
    model: BiLstmClassifier,
    matrices: list[LoadedMatrix],
    classes: tuple[str, ...],
    dataset_style: str,
    normalizer: Normalizer,
    criterion: nn.Module,
) -> tuple[float, float]:
    model.eval()
    with torch.no_grad():
        x, lengths, y = padded_batch(matrices, classes, dataset_style, normalizer)
        logits = model(x, lengths)
        loss = float(criterion(logits, y))
        accuracy = float((logits.argmax(dim=1) == y).float().mean())
    return loss, accuracy


def train_fold(
    train_matrices: list[LoadedMatrix],
    val_matrices: list[LoadedMatrix],
    config: TrainConfig,
) -> FoldResult:
    """Train one fold; the validation set is never replicated or refit."""
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    classes = classes_for_style(config.dataset_style)

    if config.augment:
        train_matrices = replicate_balanced(train_matrices, config.dataset_style, rng)

    normalizer = Normalizer.fit(train_matrices)
    n_features = train_matrices[0].values.shape[1]
    model = BiLstmClassifier(n_features, len(classes))
    optimizer = torch.optim.Adam(
        model.parameters(), lr=config.learning_rate, weight_decay=config.l2
    )
    criterion = nn.CrossEntropyLoss()

    result = FoldResult(model=model, normalizer=normalizer, classes=classes)
    best_val = float("inf")
    best_state = {k: v.clone() for k, v in model.state_dict().items()}
    stale = 0
    for epoch in range(config.epochs):
        model.train()
        order = rng.permutation(len(train_matrices))
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(order), config.batch_size):
            batch = [train_matrices[i] for i in order[start : start + config.batch_size]]
            x, lengths, y = padded_batch(batch, classes, config.dataset_style, normalizer)
            optimizer.zero_grad()
            loss = criterion(model(x, lengths), y)
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach())
            n_batches += 1
        val_loss, val_accuracy = _evaluate(
            model, val_matrices, classes, config.dataset_style, normalizer, criterion
        )
        result.curve.append(
            {
                "epoch": epoch,
                "train_loss": epoch_loss / max(n_batches, 1),
                "val_loss": val_loss,
                "val_accuracy": val_accuracy,
            }
        )
        if val_loss < best_val - 1e-9:
            best_val = val_loss
            best_state = {k: v.clone() for k, v in model.state_dict().items()}
            stale = 0
        else:
            stale += 1
            if stale > config.patience:
                break
    model.load_state_dict(best_state)
    return result


def save_checkpoint(result: FoldResult, config: TrainConfig, path: str | Path) -> None:
    torch.save(
        {
            "state_dict": result.model.state_dict(),
            "classes": list(result.classes),
            "n_features": result.model.n_features,
            "normalizer_mean": result.normalizer.mean,
            "normalizer_std": result.normalizer.std,
            "dataset_style": config.dataset_style,
            "curve": result.curve,
        },
        path,
    )


def load_checkpoint(path: str | Path) -> tuple[BiLstmClassifier, Normalizer, tuple[str, ...], dict]:
    payload = torch.load(path, weights_only=False)
    model = BiLstmClassifier(payload["n_features"], len(payload["classes"]))
    model.load_state_dict(payload["state_dict"])
    model.eval()
    normalizer = Normalizer(mean=payload["normalizer_mean"], std=payload["normalizer_std"])
    return model, normalizer, tuple(payload["classes"]), payload


def train_kfold(
    matrices: list[LoadedMatrix],
    folds: dict[str, int],
    config: TrainConfig,
    out_dir: str | Path,
) -> dict:
    """Train one model per fold; writes checkpoints and curves to ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    k = max(folds.values()) + 1
    summary = {"folds": [], "dataset_style": config.dataset_style}
    for fold in range(k):
        train_set = [m for m in matrices if folds[m.recording_id] != fold]
        val_set = [m for m in matrices if folds[m.recording_id] == fold]
        if not train_set or not val_set:
            raise ValueError(f"fold {fold}: empty train or validation split")
        result = train_fold(train_set, val_set, config)
        ckpt = out_dir / f"fold{fold}.pt"
        save_checkpoint(result, config, ckpt)
        (out_dir / f"fold{fold}_curve.json").write_text(json.dumps(result.curve, indent=1))
        summary["folds"].append(
            {
                "fold": fold,
                "checkpoint": ckpt.name,
                "best_val_accuracy": result.best_val_accuracy,
                "epochs_run": len(result.curve),
            }
        )
    (out_dir / "training_summary.json").write_text(json.dumps(summary, indent=1))
    return summary
