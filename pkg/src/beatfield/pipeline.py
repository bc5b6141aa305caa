"""Batch and streaming drivers: ingest -> preprocess -> segment -> features.

Streaming re-runs the deterministic pipeline on the buffered prefix and only
emits a row once every sample that can influence it lies a guard interval
behind the buffer end (every detection rule is local within a bounded
horizon), so emitted rows are bit-identical to the batch rows for the same
signal.  On normal end of stream the final flush processes the whole buffer,
which is exactly the batch computation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import MIN_PIECES, PipelineConfig
from .errors import ConfigError, TooFewPiecesError
from .ingest import AlarmLabel, Recording, load_recording, select_lead
from .level1 import ImputationCounter, extract_level1
from .matching import SequenceMatrix, apply_matching_layer
from .matrixio import MANIFEST_NAME, save_matrix_binary, save_matrix_csv, write_manifest
from .preprocess import detect_invalid, excise_invalid, is_mostly_invalid
from .segmentation import Piece, segment

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Rejection:
    recording_id: str
    reason: str
    auto_label: str | None = None


@dataclass
class FeaturizeResult:
    matrix: SequenceMatrix | None
    rejection: Rejection | None
    pieces: list[Piece] = field(default_factory=list)
    imputations: int = 0
    lead: str | None = None
    lead_rank: int | None = None
    invalid_fraction: float = 0.0

    @property
    def accepted(self) -> bool:
        return self.matrix is not None


def featurize_signal(
    x: np.ndarray,
    rate: float,
    config: PipelineConfig,
    recording_id: str = "",
    label: str | None = None,
) -> tuple[SequenceMatrix, list[Piece], ImputationCounter]:
    """Segment one lead and compute the full 398-column matrix."""
    pieces = segment(x, rate, config.segmentation)
    if len(pieces) < MIN_PIECES:
        raise TooFewPiecesError(len(pieces), MIN_PIECES)
    level1, counter = extract_level1(x, rate, pieces)
    piece_signals = [p.samples(x) for p in pieces]
    matrix = apply_matching_layer(
        level1,
        config.scenario,
        piece_signals=piece_signals,
        config=config.level2,
        recording_id=recording_id,
        label=label,
    )
    return matrix, pieces, counter


def featurize_recording(rec: Recording, config: PipelineConfig) -> FeaturizeResult:
    """Full per-recording flow including lead selection and invalid handling.

    Alarm-style records go through invalid-region excision and are rejected
    (auto-labeled false alarm) when mostly invalid; rhythm-style records skip
    excision because noise is one of their classes.
    """
    sel = select_lead(rec)
    x = rec.lead(sel.chosen_lead)
    label = str(rec.label) if rec.label is not None else None
    invalid_fraction = 0.0

    if config.dataset_style == "alarm2015":
        mask = detect_invalid(x, rec.sample_rate, config.preprocess)
        invalid_fraction = mask.invalid_fraction
        if is_mostly_invalid(mask, config.preprocess.invalid_record_fraction):
            auto = None
            if isinstance(rec.label, AlarmLabel):
                auto = str(AlarmLabel(rec.label.arrhythmia, False))
            return FeaturizeResult(
                matrix=None,
                rejection=Rejection(
                    rec.id,
                    f"invalid>{config.preprocess.invalid_record_fraction:.2f}",
                    auto_label=auto or "false_alarm",
                ),
                lead=sel.chosen_lead,
                lead_rank=sel.fallback_rank,
                invalid_fraction=invalid_fraction,
            )
        x = excise_invalid(x, mask)

    try:
        matrix, pieces, counter = featurize_signal(
            x, rec.sample_rate, config, recording_id=rec.id, label=label
        )
    except TooFewPiecesError as exc:
        return FeaturizeResult(
            matrix=None,
            rejection=Rejection(rec.id, f"pieces<{exc.minimum}"),
            lead=sel.chosen_lead,
            lead_rank=sel.fallback_rank,
            invalid_fraction=invalid_fraction,
        )
    return FeaturizeResult(
        matrix=matrix,
        rejection=None,
        pieces=pieces,
        imputations=counter.count,
        lead=sel.chosen_lead,
        lead_rank=sel.fallback_rank,
        invalid_fraction=invalid_fraction,
    )


def _featurize_one(args: tuple[str, str, PipelineConfig, str]) -> tuple[dict | None, dict | None, int | None]:
    """Worker body: load, featurize, write outputs; returns report fragments."""
    path, output_dir, config, fmt = args
    rec = load_recording(path)
    result = featurize_recording(rec, config)
    if result.accepted:
        sm = result.matrix
        if fmt == "csv":
            save_matrix_csv(sm, Path(output_dir) / f"{rec.id}.csv")
        else:
            save_matrix_binary(sm, Path(output_dir) / f"{rec.id}.seqmat")
        accepted = {
            "id": rec.id,
            "label": sm.label,
            "n_pieces": sm.n_pieces,
            "imputations": result.imputations,
            "lead": result.lead,
            "invalid_fraction": result.invalid_fraction,
        }
        return accepted, None, result.lead_rank
    rej = result.rejection
    return None, {"id": rej.recording_id, "reason": rej.reason, "auto_label": rej.auto_label}, result.lead_rank


def featurize_directory(
    input_dir: str | Path,
    output_dir: str | Path,
    config: PipelineConfig,
    fmt: str = "binary",
    workers: int = 1,
) -> dict:
    """Featurize every ``*.csv`` recording in a directory; returns the run report.

    Recordings are independent, so ``workers > 1`` fans them out over a
    bounded process pool; outputs and the report are identical either way.
    """
    input_dir, output_dir = Path(input_dir), Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    write_manifest(output_dir)

    accepted: list[dict] = []
    rejected: list[dict] = []
    lead_fallbacks: dict[str, int] = {}
    total_imputations = 0

    paths = sorted(input_dir.glob("*.csv"))
    jobs = [(str(p), str(output_dir), config, fmt) for p in paths]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_featurize_one, jobs))
    else:
        outcomes = [_featurize_one(job) for job in jobs]

    for acc, rej, lead_rank in outcomes:
        if lead_rank is not None:
            lead_fallbacks[str(lead_rank)] = lead_fallbacks.get(str(lead_rank), 0) + 1
        if acc is not None:
            total_imputations += acc["imputations"]
            accepted.append(acc)
        else:
            rejected.append(rej)

    labels_lines = ["id,label"] + [f"{a['id']},{a['label']}" for a in accepted]
    (output_dir / "labels.csv").write_text("\n".join(labels_lines) + "\n", encoding="utf-8")

    return {
        "config": config.to_dict(),
        "n_recordings": len(paths),
        "accepted": accepted,
        "rejected": rejected,
        "counters": {
            "total_imputations": total_imputations,
            "lead_fallbacks": lead_fallbacks,
            "excluded_invalid": sum(1 for r in rejected if r["reason"].startswith("invalid")),
            "excluded_too_few_pieces": sum(
                1 for r in rejected if r["reason"].startswith("pieces")
            ),
        },
        "manifest": MANIFEST_NAME,
    }


class StreamInterrupted(Exception):
    """Raised by a frame source to signal an abnormal stop."""


class StreamFeaturizer:
    """Incremental row emission with batch-identical values.

    Rows are emitted once piece h+1's R peak lies at least ``guard_seconds``
    behind the buffer end (and, for auto-threshold event scenarios, once the
    warmup pieces are stable).  ``finish()`` flushes the remainder; an
    interrupted stream emits nothing further and the partial tail piece is
    discarded with a warning.
    """

    def __init__(
        self,
        rate: float,
        config: PipelineConfig,
        recording_id: str = "",
        label: str | None = None,
        guard_seconds: float = 3.0,
    ):
        if not config.scenario.causal:
            raise ConfigError("offline scenario cannot run in stream mode")
        self.rate = rate
        self.config = config
        self.recording_id = recording_id
        self.label = label
        self.guard = int(round(guard_seconds * rate))
        self._chunks: list[np.ndarray] = []
        self._n = 0
        self._emitted = 0
        self._closed = False

    def push(self, frame: np.ndarray) -> list[tuple[int, np.ndarray]]:
        """Append samples; returns newly safe (piece_index, row) pairs."""
        if self._closed:
            raise ConfigError("stream already closed")
        frame = np.asarray(frame, dtype=float)
        if frame.size:
            self._chunks.append(frame)
            self._n += frame.size
        return self._advance(final=False)

    def finish(self) -> list[tuple[int, np.ndarray]]:
        """Flush: process the complete buffer exactly as batch mode."""
        if self._closed:
            return []
        self._closed = True
        return self._advance(final=True)

    def interrupt(self) -> None:
        self._closed = True
        log.warning(
            "%s: stream interrupted; partial piece discarded, %d rows emitted",
            self.recording_id,
            self._emitted,
        )

    def _advance(self, final: bool) -> list[tuple[int, np.ndarray]]:
        if self._n < int(2 * self.rate):
            if final:
                raise TooFewPiecesError(0, MIN_PIECES)
            return []
        x = np.concatenate(self._chunks)
        try:
            matrix, pieces, _ = featurize_signal(
                x, self.rate, self.config, self.recording_id, self.label
            )
        except TooFewPiecesError:
            if final:
                raise
            return []

        l = len(pieces)
        if final:
            hi = l
        else:
            limit = self._n - self.guard
            safe = 0
            for idx in range(l - 1):
                if pieces[idx + 1].fid.r <= limit:
                    safe = idx + 1
                else:
                    break
            scen = self.config.scenario
            if scen.kind == "event" and scen.threshold is None and safe < scen.warmup:
                return []
            hi = safe
        if hi <= self._emitted:
            return []
        rows = [(h, matrix.values[h - 1]) for h in range(self._emitted + 1, hi + 1)]
        self._emitted = hi
        return rows


def stream_recording(
    rec: Recording,
    config: PipelineConfig,
    frame_seconds: float = 1.0,
) -> list[tuple[int, np.ndarray]]:
    """Convenience: feed one recording frame-by-frame through the streamer."""
    sel = select_lead(rec)
    x = rec.lead(sel.chosen_lead)
    label = str(rec.label) if rec.label is not None else None
    streamer = StreamFeaturizer(rec.sample_rate, config, rec.id, label)
    frame = max(1, int(round(frame_seconds * rec.sample_rate)))
    rows: list[tuple[int, np.ndarray]] = []
    for start in range(0, x.size, frame):
        rows.extend(streamer.push(x[start : start + frame]))
    rows.extend(streamer.finish())
    return rows
