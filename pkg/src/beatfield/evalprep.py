"""Dataset preparation and challenge metrics.

Z-scoring is fit per group (per arrhythmia type for alarm-style data, a
single global group for rhythm-style data) on training rows only, and the
fitted parameters are re-applied verbatim to held-out rows.  Replication
augmentation and the stratified k-fold keep replicas co-located with their
source recording so no information leaks across folds.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError, ParameterError
from .ingest import ALARM_TYPES, RHYTHM_CLASSES, AlarmLabel, Label

log = logging.getLogger(__name__)

AFIB2017_ADDITIONS = {"Normal": 3000, "AFib": 4000, "Other": 5000, "Noise": 3000}


# ---------------------------------------------------------------------------
# z-scoring


@dataclass
class ZScoreModel:
    """Per-group column means/stds; zero-std columns are centered, scale 1."""

    means: dict[str, np.ndarray] = field(default_factory=dict)
    stds: dict[str, np.ndarray] = field(default_factory=dict)
    zero_std_columns: dict[str, int] = field(default_factory=dict)

    def fit(self, groups: Mapping[str, np.ndarray]) -> "ZScoreModel":
        for name, data in groups.items():
            data = np.asarray(data, dtype=float)
            if data.shape[0] < 2:
                raise ParameterError(f"group {name!r} needs >= 2 rows to fit")
            mean = data.mean(axis=0)
            std = data.std(axis=0)
            zero = std == 0.0
            if zero.any():
                self.zero_std_columns[name] = int(zero.sum())
                log.warning("group %s: %d zero-std columns left unscaled", name, zero.sum())
            std = np.where(zero, 1.0, std)
            self.means[name] = mean
            self.stds[name] = std
        return self

    def transform(self, group: str, data: np.ndarray) -> np.ndarray:
        if group not in self.means:
            raise DataError(f"no z-score parameters fitted for group {group!r}")
        return (np.asarray(data, dtype=float) - self.means[group]) / self.stds[group]


def zscore_columns(
    groups: Mapping[str, np.ndarray],
) -> tuple[dict[str, np.ndarray], ZScoreModel]:
    """Fit on the given per-group matrices and return normalized copies."""
    model = ZScoreModel().fit(groups)
    return {g: model.transform(g, m) for g, m in groups.items()}, model


# ---------------------------------------------------------------------------
# dataset entries, augmentation, folds


@dataclass(frozen=True)
class DatasetEntry:
    """One training instance; replicas share their source recording's id."""

    uid: str
    source_id: str
    label: Label
    replica: bool = False

    @property
    def class_key(self) -> str:
        if isinstance(self.label, AlarmLabel):
            return "true" if self.label.is_true else "false"
        return self.label.rhythm

    @property
    def strat_key(self) -> str:
        if isinstance(self.label, AlarmLabel):
            return f"{self.label.arrhythmia}:{self.class_key}"
        return self.class_key


@dataclass(frozen=True)
class AugmentPolicy:
    """kind ``afib2017``: add the fixed per-class counts; kind ``alarm2015``:
    replicate each alarm class up to twice the largest class, either within
    each arrhythmia type (default) or globally (``per_type=False``)."""

    kind: str
    per_type: bool = True
    additions: Mapping[str, int] | None = None


def augment_replicate(
    dataset: Sequence[DatasetEntry],
    policy: AugmentPolicy,
    rng: np.random.Generator,
) -> list[DatasetEntry]:
    """Append replica entries per the policy; originals are kept untouched."""
    out = list(dataset)
    seq = 0

    def replicate(members: list[DatasetEntry], n: int) -> None:
        nonlocal seq
        if n <= 0:
            return
        if not members:
            raise DataError("cannot replicate an empty class")
        for pick in rng.integers(0, len(members), size=n):
            src = members[int(pick)]
            out.append(replace(src, uid=f"{src.source_id}#r{seq:06d}", replica=True))
            seq += 1

    if policy.kind == "afib2017":
        additions = dict(policy.additions or AFIB2017_ADDITIONS)
        for cls in RHYTHM_CLASSES:
            members = [e for e in dataset if e.class_key == cls]
            n = additions.get(cls, 0)
            if n and not members:
                raise DataError(f"class {cls!r} is empty, cannot replicate")
            replicate(members, n)
        return out
    if policy.kind == "alarm2015":
        if policy.per_type:
            scopes = [
                [e for e in dataset if isinstance(e.label, AlarmLabel) and e.label.arrhythmia == t]
                for t in ALARM_TYPES
            ]
            scopes = [s for s in scopes if s]
        else:
            scopes = [list(dataset)]
        for scope in scopes:
            by_class = {
                cls: [e for e in scope if e.class_key == cls] for cls in ("false", "true")
            }
            if not all(by_class.values()):
                raise DataError("alarm replication needs both true and false instances")
            target = 2 * max(len(v) for v in by_class.values())
            for members in by_class.values():
                replicate(members, target - len(members))
        return out
    raise ParameterError(f"unknown augmentation policy {policy.kind!r}")


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: dict[str, int]  # source recording id -> fold
    stratify_by: str = "label"

    def fold_of(self, entry: DatasetEntry) -> int:
        return self.assignments[entry.source_id]

    def to_dict(self) -> dict:
        return {"k": self.k, "stratify_by": self.stratify_by, "assignments": dict(self.assignments)}

    @classmethod
    def from_dict(cls, d: dict) -> "FoldPlan":
        return cls(
            k=int(d["k"]),
            assignments={k: int(v) for k, v in d["assignments"].items()},
            stratify_by=d.get("stratify_by", "label"),
        )


def kfold_split(
    dataset: Sequence[DatasetEntry], k: int, seed: int
) -> FoldPlan:
    """Stratified folds over distinct source recordings.

    Replicas always land in their source's fold.  Classes with fewer than k
    members are still spread round-robin (relaxed stratification, warned).
    """
    if k < 2:
        raise ParameterError("k must be >= 2")
    sources: dict[str, str] = {}
    for e in dataset:
        sources.setdefault(e.source_id, e.strat_key)
    if k > len(sources):
        raise ParameterError(f"k={k} exceeds {len(sources)} distinct recordings")
    rng = np.random.default_rng(seed)
    assignments: dict[str, int] = {}
    by_class: dict[str, list[str]] = {}
    for sid in sorted(sources):
        by_class.setdefault(sources[sid], []).append(sid)
    offset = 0
    for cls in sorted(by_class):
        ids = by_class[cls]
        if len(ids) < k:
            log.warning("class %s has %d < k=%d members; stratification relaxed", cls, len(ids), k)
        order = rng.permutation(len(ids))
        for i, pos in enumerate(order):
            assignments[ids[int(pos)]] = (offset + i) % k
        offset += len(ids)
    return FoldPlan(k=k, assignments=assignments)


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ParameterError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def score_2015(c: ConfusionCounts) -> float:
    """100*(TP+TN)/(TP+TN+FP+5*FN): missed true alarms cost fivefold."""
    denom = c.tp + c.tn + c.fp + 5 * c.fn
    if denom == 0:
        raise DataError("score undefined for all-zero confusion counts")
    return 100.0 * (c.tp + c.tn) / denom


def score_2017(f1_normal: float, f1_af: float, f1_other: float) -> float:
    """Mean F1 over Normal, AFib and Other (Noise excluded)."""
    return (f1_normal + f1_af + f1_other) / 3.0


def per_class_rates(
    table: np.ndarray, classes: Sequence[str]
) -> dict[str, dict[str, float | bool]]:
    """One-vs-rest TPR/TNR/F1 in percent from a (actual x predicted) table.

    F1 with no positives and no predictions is reported as 0 and flagged.
    """
    table = np.asarray(table, dtype=np.int64)
    if table.shape != (len(classes), len(classes)):
        raise ParameterError("contingency table shape does not match class list")
    total = int(table.sum())
    out: dict[str, dict[str, float | bool]] = {}
    for i, cls in enumerate(classes):
        tp = int(table[i, i])
        fn = int(table[i].sum()) - tp
        fp = int(table[:, i].sum()) - tp
        tn = total - tp - fn - fp
        tpr = 100.0 * tp / (tp + fn) if tp + fn else 0.0
        tnr = 100.0 * tn / (tn + fp) if tn + fp else 0.0
        flagged = False
        if tp + fn == 0 and tp + fp == 0:
            f1 = 0.0
            flagged = True
        else:
            precision = tp / (tp + fp) if tp + fp else 0.0
            recall = tp / (tp + fn) if tp + fn else 0.0
            f1 = (
                100.0 * 2.0 * precision * recall / (precision + recall)
                if precision + recall
                else 0.0
            )
        out[cls] = {"tpr": tpr, "tnr": tnr, "f1": f1, "f1_flagged_zero": flagged}
    return out


def confusion_table(
    actual: Sequence[str], predicted: Sequence[str], classes: Sequence[str]
) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    table = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for a, p in zip(actual, predicted, strict=True):
        table[index[a], index[p]] += 1
    return table


def write_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=1, sort_keys=True), encoding="utf-8")
