"""Dataset assembly: labels, stratified folds, replication, padded batches."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .matrices import LoadedMatrix

CLASSES_2017 = ("Normal", "AFib", "Other", "Noise")
CLASSES_2015 = ("false", "true")


def classes_for_style(dataset_style: str) -> tuple[str, ...]:
    return CLASSES_2015 if dataset_style == "alarm2015" else CLASSES_2017


def class_of(matrix: LoadedMatrix, dataset_style: str) -> str:
    """Map a stored label to its training class.

    Alarm labels arrive as ``TYPE:true|false``; the alarm flag is the class.
    """
    if matrix.label is None:
        raise ValueError(f"{matrix.recording_id}: unlabeled matrix")
    if dataset_style == "alarm2015":
        return matrix.label.split(":", 1)[1].lower()
    return matrix.label


def stratified_folds(
    labels: dict[str, str], k: int, seed: int
) -> dict[str, int]:
    """Recording id -> fold index, spreading each class round-robin."""
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = np.random.default_rng(seed)
    by_class: dict[str, list[str]] = {}
    for rid in sorted(labels):
        by_class.setdefault(labels[rid], []).append(rid)
    assignments: dict[str, int] = {}
    offset = 0
    for cls in sorted(by_class):
        ids = by_class[cls]
        order = rng.permutation(len(ids))
        for i, pos in enumerate(order):
            assignments[ids[int(pos)]] = (offset + i) % k
        offset += len(ids)
    return assignments


def replicate_balanced(
    matrices: list[LoadedMatrix], dataset_style: str, rng: np.random.Generator
) -> list[LoadedMatrix]:
    """Oversample training instances by exact replication until classes match
    the largest one.  Applied to training folds only, never to validation."""
    by_class: dict[str, list[LoadedMatrix]] = {}
    for m in matrices:
        by_class.setdefault(class_of(m, dataset_style), []).append(m)
    target = max(len(v) for v in by_class.values())
    out = list(matrices)
    for members in by_class.values():
        deficit = target - len(members)
        if deficit > 0:
            for pick in rng.integers(0, len(members), size=deficit):
                out.append(members[int(pick)])
    return out


@dataclass
class Normalizer:
    """Per-column standardization fit on training rows only."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, matrices: list[LoadedMatrix]) -> "Normalizer":
        stacked = np.vstack([m.values for m in matrices])
        mean = stacked.mean(axis=0)
        std = stacked.std(axis=0)
        std[std == 0.0] = 1.0
        return cls(mean=mean, std=std)

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (values - self.mean) / self.std


def padded_batch(
    matrices: list[LoadedMatrix],
    classes: tuple[str, ...],
    dataset_style: str,
    normalizer: Normalizer,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """(padded float32 [B, T, F], lengths [B], class indices [B]).

    Rows stay in piece order; shorter sequences are zero-padded on the right
    and masked out via the length vector when packed.
    """
    lengths = torch.tensor([m.values.shape[0] for m in matrices], dtype=torch.long)
    max_len = int(lengths.max())
    n_features = matrices[0].values.shape[1]
    x = torch.zeros(len(matrices), max_len, n_features, dtype=torch.float32)
    for i, m in enumerate(matrices):
        vals = normalizer.apply(m.values)
        x[i, : vals.shape[0]] = torch.from_numpy(vals).float()
    index = {c: i for i, c in enumerate(classes)}
    y = torch.tensor(
        [index[class_of(m, dataset_style)] for m in matrices], dtype=torch.long
    )
    return x, lengths, y
