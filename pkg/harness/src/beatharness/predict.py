"""Prediction: checkpoint + matrices -> predictions CSV.

Output format is ``id,label,score_<class>...`` with one row per recording and
softmax scores that sum to 1.
"""

from __future__ import annotations

from pathlib import Path

import torch

from .data import Normalizer
from .matrices import LoadedMatrix, SchemaMismatchError
from .model import BiLstmClassifier


def predict(
    model: BiLstmClassifier,
    normalizer: Normalizer,
    classes: tuple[str, ...],
    matrices: list[LoadedMatrix],
) -> list[tuple[str, str, list[float]]]:
    for m in matrices:
        if m.values.shape[1] != model.n_features:
            raise SchemaMismatchError(
                f"{m.recording_id}: {m.values.shape[1]} columns, model expects {model.n_features}"
            )
    out: list[tuple[str, str, list[float]]] = []
    model.eval()
    for m in matrices:
        vals = normalizer.apply(m.values)
        x = torch.from_numpy(vals).float().unsqueeze(0)
        lengths = torch.tensor([vals.shape[0]], dtype=torch.long)
        probs = model.probabilities(x, lengths)[0]
        scores = [float(p) for p in probs]
        out.append((m.recording_id, classes[int(probs.argmax())], scores))
    return out


def write_predictions(
    rows: list[tuple[str, str, list[float]]],
    classes: tuple[str, ...],
    path: str | Path,
) -> None:
    header = "id,label," + ",".join(f"score_{c}" for c in classes)
    lines = [header]
    for rid, label, scores in rows:
        lines.append(f"{rid},{label}," + ",".join(repr(s) for s in scores))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
