"""Receptive-field bounds and the five comparative (level-2) functions.

For each piece h a window of neighboring pieces is selected by the configured
scenario (whole recording, growing prefix, fixed sliding window, or runs
delimited by DTW-triggered events).  Over that window, per unstarred level-1
feature, five scalars are computed: median difference, quantized-mode
difference, Shannon entropy, log-energy entropy, and a pointwise KL term
against the window mean.  The five blocks are appended after the 103 raw
features, giving 103 + 5*59 = 398 columns per piece.

Piece indices are 1-based here to match the bound formulas; indices <= 0 are
padding and resolve to piece 1's values (replicate-first rule).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import MIN_PIECES, Level2Config, Scenario
from .dtw import consecutive_distances, dtw_distance, piece_profile
from .errors import ConfigError, ParameterError, TooFewPiecesError
from .level1 import SCHEMA, UNSTARRED_INDICES, N_FEATURES, N_UNSTARRED
from .segmentation import Piece

LEVEL2_FUNCTIONS = (
    "median_diff",
    "mode_diff",
    "shannon_entropy",
    "log_energy_entropy",
    "kl_divergence",
)

N_COLUMNS = N_FEATURES + len(LEVEL2_FUNCTIONS) * N_UNSTARRED


def column_names() -> tuple[str, ...]:
    """The 398 export columns: level-1 schema order, then 5 per unstarred feature."""
    names = [f.name for f in SCHEMA]
    for k in UNSTARRED_INDICES:
        base = SCHEMA[int(k)].name
        names.extend(f"{base}__{fn}" for fn in LEVEL2_FUNCTIONS)
    return tuple(names)


@dataclass(frozen=True)
class ReceptiveField:
    """1-based piece-index bounds; start may be <= 0 (padding)."""

    start: int
    end: int
    for_piece: int

    def __post_init__(self):
        if self.end < self.start:
            raise ParameterError(f"empty receptive field {self}")

    @property
    def length(self) -> int:
        return self.end - self.start + 1


def rf_bounds(
    scenario: Scenario,
    h: int,
    l: int,
    event_starts: Sequence[int] | None = None,
) -> ReceptiveField:
    """Window bounds for piece ``h`` of ``l`` under the scenario.

    Event scenarios need ``event_starts``: the sorted 1-based indices where a
    fresh field begins (piece 1 plus every piece whose predecessor pair
    exceeded the trigger threshold).
    """
    if l < MIN_PIECES:
        raise ParameterError(f"need at least {MIN_PIECES} pieces, got {l}")
    if not 1 <= h <= l:
        raise ParameterError(f"piece index {h} outside 1..{l}")
    if scenario.kind == "offline":
        return ReceptiveField(1, l, h)
    if scenario.kind == "incremental":
        return ReceptiveField(min(h - 3, 1), h, h)
    if scenario.kind == "fixed":
        e = scenario.rf_length
        return ReceptiveField(h - e + 1, h, h)
    if scenario.kind == "event":
        if event_starts is None:
            raise ConfigError("event scenario requires event_starts")
        end = h - 1
        eligible = [s for s in event_starts if s <= end]
        start = max(eligible) if eligible else end
        if end - start + 1 < 2:
            start = end - 1
        return ReceptiveField(start, end, h)
    raise ConfigError(f"unknown scenario kind {scenario.kind!r}")


def pad_features(field: ReceptiveField, features: np.ndarray) -> np.ndarray:
    """Resolve a field into feature rows; indices <= 0 replicate piece 1."""
    features = np.asarray(features)
    l = features.shape[0]
    idx = np.arange(field.start, field.end + 1)
    if idx.max() > l:
        raise ParameterError(f"field {field} extends past {l} pieces")
    resolved = np.where(idx <= 0, 1, idx) - 1
    return features[resolved]


def _quantize_columns(w: np.ndarray, bins: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nearest-level quantization per column; levels span min..max inclusive.

    Returns (level index per cell, level0 per column, level step per column).
    Ties between two levels resolve toward the lower one.
    """
    mn = w.min(axis=0)
    span = w.max(axis=0) - mn
    step = span / (bins - 1)
    safe = np.where(step > 0, step, 1.0)
    t = (w - mn) / safe
    idx = np.ceil(t - 0.5).astype(int)
    np.clip(idx, 0, bins - 1, out=idx)
    idx[:, step == 0] = 0
    return idx, mn, step


def _level2_block(w: np.ndarray, current: np.ndarray, cfg: Level2Config) -> np.ndarray:
    """(m, 5) level-2 values for one piece: window ``w`` is (e, m)."""
    e, m = w.shape
    bins = cfg.bins

    median_diff = current - np.median(w, axis=0)

    idx, mn, step = _quantize_columns(w, bins)
    flat = idx + np.arange(m) * bins
    counts = np.bincount(flat.ravel(), minlength=m * bins).reshape(m, bins)
    modal = np.argmax(counts, axis=1)
    mode_val = mn + modal * step
    mode_diff = current - mode_val

    p = counts / e
    plogp = np.zeros_like(p)
    nz = p > 0
    plogp[nz] = p[nz] * np.log(p[nz])
    shannon = -plogp.sum(axis=1)

    log_energy = np.log(w * w + cfg.log_energy_eps).sum(axis=0)

    mins = np.minimum(w.min(axis=0), current)
    a = current - mins + cfg.kl_eps
    b = w.mean(axis=0) - mins + cfg.kl_eps
    kl = a * np.log(a / b)

    return np.column_stack([median_diff, mode_diff, shannon, log_energy, kl])


def _scalar(window, current, col: int, cfg: Level2Config | None) -> float:
    w = np.asarray(window, dtype=float).reshape(-1, 1)
    cur = np.asarray([current], dtype=float)
    block = _level2_block(w, cur, cfg or Level2Config())
    return float(block[0, col])


def level2_median(window, current, cfg: Level2Config | None = None) -> float:
    return _scalar(window, current, 0, cfg)


def level2_mode(window, current, cfg: Level2Config | None = None) -> float:
    return _scalar(window, current, 1, cfg)


def level2_shannon(window, cfg: Level2Config | None = None) -> float:
    return _scalar(window, 0.0, 2, cfg)


def level2_log_energy(window, cfg: Level2Config | None = None) -> float:
    return _scalar(window, 0.0, 3, cfg)


def level2_kl(window, current, cfg: Level2Config | None = None) -> float:
    return _scalar(window, current, 4, cfg)


def auto_event_threshold(distances: np.ndarray, warmup: int) -> float:
    """median + 2*MAD over the warmup's consecutive-piece distances."""
    d = np.asarray(distances, dtype=float)[: max(1, warmup - 1)]
    med = float(np.median(d))
    mad = float(np.median(np.abs(d - med)))
    return max(med + 2.0 * mad, 1e-12)


def event_boundaries(
    pieces: list[Piece], x: np.ndarray, threshold: float, n_points: int = 64
) -> list[int]:
    """1-based indices of pieces that open a fresh field (trigger points).

    A boundary sits at j+1 wherever the DTW distance between the normalized
    profiles of pieces j and j+1 exceeds the threshold.
    """
    if len(pieces) < 2:
        raise ParameterError("need at least 2 pieces")
    profiles = [piece_profile(p.samples(x), n_points) for p in pieces]
    return [
        j + 2
        for j in range(len(profiles) - 1)
        if dtw_distance(profiles[j], profiles[j + 1]) > threshold
    ]


@dataclass(frozen=True)
class SequenceMatrix:
    """Per-recording matrix: one row per piece, 398 columns."""

    values: np.ndarray
    columns: tuple[str, ...]
    recording_id: str
    label: str | None
    scenario: dict

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != len(self.columns):
            raise ParameterError(
                f"matrix shape {self.values.shape} does not match {len(self.columns)} columns"
            )

    @property
    def n_pieces(self) -> int:
        return self.values.shape[0]


def apply_matching_layer(
    level1: np.ndarray,
    scenario: Scenario,
    piece_signals: list[np.ndarray] | None = None,
    config: Level2Config | None = None,
    recording_id: str = "",
    label: str | None = None,
) -> SequenceMatrix:
    """Append the five level-2 blocks to the level-1 matrix.

    Level-2 values are computed only for the 59 unstarred features; starred
    level-1 columns pass through untouched.  The event scenario requires the
    raw piece signals to drive the DTW trigger.
    """
    cfg = config or Level2Config()
    level1 = np.asarray(level1, dtype=float)
    l = level1.shape[0]
    if l < MIN_PIECES:
        raise TooFewPiecesError(l, MIN_PIECES)
    if level1.shape[1] != N_FEATURES:
        raise ParameterError(f"level-1 matrix must have {N_FEATURES} columns")

    unstarred = level1[:, UNSTARRED_INDICES]

    event_starts = None
    resolved_threshold = scenario.threshold
    if scenario.kind == "event":
        if piece_signals is None:
            raise ConfigError("event scenario needs the raw piece signals")
        profiles = [piece_profile(s, cfg.dtw_points) for s in piece_signals]
        distances = consecutive_distances(profiles)
        if resolved_threshold is None:
            resolved_threshold = auto_event_threshold(distances, scenario.warmup)
        event_starts = [1] + [
            j + 2 for j, d in enumerate(distances) if d > resolved_threshold
        ]

    level2 = np.empty((l, len(LEVEL2_FUNCTIONS) * N_UNSTARRED), dtype=float)
    windows: dict[tuple[int, int], np.ndarray] = {}
    for h in range(1, l + 1):
        field = rf_bounds(scenario, h, l, event_starts)
        key = (field.start, field.end)
        window = windows.get(key)
        if window is None:
            window = pad_features(field, unstarred)
            windows[key] = window
        block = _level2_block(window, unstarred[h - 1], cfg)
        level2[h - 1] = block.ravel()

    values = np.hstack([level1, level2])
    return SequenceMatrix(
        values=values,
        columns=column_names(),
        recording_id=recording_id,
        label=label,
        scenario=scenario.descriptor(resolved_threshold),
    )
