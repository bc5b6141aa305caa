"""Recording ingestion: CSV samples + key=value header, lead selection.

File layout per recording ``<stem>.csv`` / ``<stem>.hdr``:

* samples: UTF-8 CSV, '.' decimal, no header row, one sample per row, one
  column per lead;
* header: ``key=value`` lines with keys ``sample_rate``, ``leads``
  (comma-separated names) and optionally ``label``.

Labels are tagged: alarm-style records carry ``<ARRHYTHMIA>:<true|false>``
(e.g. ``VT:true``), rhythm-style records carry one of ``Normal``, ``AFib``,
``Other``, ``Noise``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MalformedInputError, ParameterError, StructuralError

ALARM_TYPES = ("ASY", "EBR", "ET", "VF", "VT")
RHYTHM_CLASSES = ("Normal", "AFib", "Other", "Noise")

#: Lead preference: lead II, then I, aVF, V; anything else is rank 4.
LEAD_PRIORITY = ("II", "I", "AVF", "V")


@dataclass(frozen=True)
class AlarmLabel:
    arrhythmia: str
    is_true: bool

    def __str__(self) -> str:
        return f"{self.arrhythmia}:{'true' if self.is_true else 'false'}"


@dataclass(frozen=True)
class RhythmLabel:
    rhythm: str

    def __str__(self) -> str:
        return self.rhythm


Label = AlarmLabel | RhythmLabel


def parse_label(text: str) -> Label:
    text = text.strip()
    if ":" in text:
        arr, _, flag = text.partition(":")
        arr = arr.strip().upper()
        flag = flag.strip().lower()
        if arr not in ALARM_TYPES or flag not in ("true", "false"):
            raise MalformedInputError(f"bad alarm label {text!r}")
        return AlarmLabel(arr, flag == "true")
    for cls in RHYTHM_CLASSES:
        if text.lower() == cls.lower():
            return RhythmLabel(cls)
    raise MalformedInputError(f"bad label {text!r}")


@dataclass(frozen=True)
class Recording:
    """One multi-lead recording; immutable after construction."""

    id: str
    sample_rate: float
    leads: tuple[tuple[str, np.ndarray], ...]
    label: Label | None = None

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise StructuralError(f"{self.id}: sample_rate must be positive")
        if not self.leads:
            raise StructuralError(f"{self.id}: at least one lead required")
        n = self.leads[0][1].size
        if n < 1:
            raise StructuralError(f"{self.id}: empty lead data")
        for name, samples in self.leads:
            if samples.size != n:
                raise StructuralError(
                    f"{self.id}: lead {name!r} has {samples.size} samples, expected {n}"
                )

    @property
    def lead_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.leads)

    @property
    def n_samples(self) -> int:
        return self.leads[0][1].size

    def lead(self, name: str) -> np.ndarray:
        for lead_name, samples in self.leads:
            if lead_name == name:
                return samples
        raise KeyError(name)


@dataclass(frozen=True)
class LeadSelection:
    chosen_lead: str
    fallback_rank: int


def select_lead(rec: Recording) -> LeadSelection:
    """Pick the working lead: II, else I, aVF, V, else first in file order."""
    upper = {name.upper(): name for name, _ in reversed(rec.leads)}
    for rank, wanted in enumerate(LEAD_PRIORITY):
        if wanted in upper:
            return LeadSelection(upper[wanted], rank)
    return LeadSelection(rec.leads[0][0], 4)


def _parse_header(path: Path) -> dict[str, str]:
    fields: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise MalformedInputError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    return fields


def load_recording(
    path: str | Path,
    format: str = "header+csv",
    sample_rate: float = 250.0,
    rec_id: str | None = None,
) -> Recording:
    """Load one recording.

    ``format`` is ``"header+csv"`` (sibling ``.hdr`` required) or ``"csv"``
    (no header; ``sample_rate`` argument applies, leads named ch1..chN).
    """
    path = Path(path)
    if not path.exists():
        raise MalformedInputError(f"no such file: {path}")
    rec_id = rec_id or path.stem

    label: Label | None = None
    if format == "header+csv":
        hdr_path = path.with_suffix(".hdr")
        if not hdr_path.exists():
            raise MalformedInputError(f"missing header file: {hdr_path}")
        fields = _parse_header(hdr_path)
        try:
            rate = float(fields["sample_rate"])
        except KeyError:
            raise MalformedInputError(f"{hdr_path}: missing sample_rate") from None
        except ValueError:
            raise MalformedInputError(f"{hdr_path}: bad sample_rate {fields['sample_rate']!r}") from None
        if rate <= 0:
            raise MalformedInputError(f"{hdr_path}: sample_rate must be positive")
        if "leads" not in fields:
            raise MalformedInputError(f"{hdr_path}: missing leads")
        lead_names = [s.strip() for s in fields["leads"].split(",") if s.strip()]
        if not lead_names:
            raise MalformedInputError(f"{hdr_path}: empty leads list")
        if "label" in fields and fields["label"]:
            label = parse_label(fields["label"])
    elif format == "csv":
        rate = float(sample_rate)
        if rate <= 0:
            raise ParameterError("sample_rate must be positive")
        lead_names = None
    else:
        raise ParameterError(f"unknown format {format!r}")

    rows: list[list[float]] = []
    width: int | None = None
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise StructuralError(
                f"{path}:{lineno}: row has {len(cells)} columns, expected {width}"
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise MalformedInputError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise StructuralError(f"{path}: no samples")

    data = np.asarray(rows, dtype=float)
    if lead_names is None:
        lead_names = [f"ch{i+1}" for i in range(data.shape[1])]
    if len(lead_names) != data.shape[1]:
        raise StructuralError(
            f"{path}: {data.shape[1]} columns but {len(lead_names)} lead names in header"
        )
    leads = tuple((name, np.ascontiguousarray(data[:, i])) for i, name in enumerate(lead_names))
    return Recording(id=rec_id, sample_rate=rate, leads=leads, label=label)


def save_recording(rec: Recording, path: str | Path) -> None:
    """Write a recording as ``<path>.csv`` + ``<path>.hdr`` (round-trippable)."""
    path = Path(path)
    stem = path.with_suffix("")
    data = np.column_stack([samples for _, samples in rec.leads])
    lines = [",".join(repr(float(v)) for v in row) for row in data]
    stem.with_suffix(".csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    hdr = [
        f"sample_rate={rec.sample_rate!r}",
        f"leads={','.join(rec.lead_names)}",
    ]
    if rec.label is not None:
        hdr.append(f"label={rec.label}")
    stem.with_suffix(".hdr").write_text("\n".join(hdr) + "\n", encoding="utf-8")
