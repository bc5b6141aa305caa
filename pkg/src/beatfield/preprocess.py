"""Invalid-region detection and excision.

The signal is scanned in non-overlapping 2-second windows.  A window is
flagged ``hf_noise`` when the mean 70-90 Hz magnitude envelope exceeds a
ratio threshold times the mean 1-40 Hz envelope, and ``saturation``/``flat``
when one histogram bin concentrates most of its samples (rail bins count as
saturation).  Flagged spans are cut out before segmentation; recordings that
are mostly invalid are reported separately so alarm-style callers can label
them false alarms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import firwin

from .config import PreprocessConfig
from .errors import ParameterError

HF_BAND = (70.0, 90.0)
REFERENCE_BAND = (1.0, 40.0)


@dataclass(frozen=True)
class InvalidWindow:
    start: int  # inclusive sample index
    end: int    # exclusive sample index
    reason: str  # hf_noise | saturation | flat


@dataclass(frozen=True)
class InvalidMask:
    windows: tuple[InvalidWindow, ...]
    invalid_fraction: float

    def __post_init__(self):
        prev_end = -1
        for w in self.windows:
            if w.start < prev_end:
                raise ParameterError("mask windows must be sorted and non-overlapping")
            prev_end = w.end

    @property
    def masked_samples(self) -> int:
        return sum(w.end - w.start for w in self.windows)


def band_envelope(x: np.ndarray, rate: float, lo: float, hi: float) -> np.ndarray:
    """Magnitude envelope of the lo-hi band.

    Zero-phase FIR band-pass (order ceil(rate/5), Hamming) followed by a
    100 ms moving RMS scaled by sqrt(2), so a sinusoid of amplitude A inside
    the band yields a plateau near A.
    """
    x = np.asarray(x, dtype=float)
    if not (0.0 < lo < hi < rate / 2.0):
        raise ParameterError(f"band ({lo}, {hi}) outside (0, Nyquist={rate/2})")
    order = int(np.ceil(rate / 5.0))
    numtaps = order + 1
    if numtaps % 2 == 0:
        numtaps += 1
    taps = firwin(numtaps, [lo, hi], pass_zero=False, window="hamming", fs=rate)
    band = np.convolve(x, taps, mode="same")
    win = max(1, round(0.1 * rate))
    power = np.convolve(band * band, np.ones(win) / win, mode="same")
    return np.sqrt(2.0 * np.clip(power, 0.0, None))


def detect_invalid(
    x: np.ndarray, rate: float, config: PreprocessConfig | None = None
) -> InvalidMask:
    """Flag 2-second windows that are noisy, saturated, or flat.

    Windows are aligned to the signal start; a final partial window is
    evaluated when it covers at least ``min_tail_seconds``.  Signals shorter
    than one window produce an empty mask.
    """
    cfg = config or PreprocessConfig()
    x = np.asarray(x, dtype=float)
    n = x.size
    win = int(round(cfg.window_seconds * rate))
    if n < win:
        return InvalidMask(windows=(), invalid_fraction=0.0)
    if rate / 2.0 <= HF_BAND[1]:
        raise ParameterError(
            f"sample rate {rate} Hz too low for the {HF_BAND[0]}-{HF_BAND[1]} Hz noise band"
        )

    env_hf = band_envelope(x, rate, *HF_BAND)
    env_ref = band_envelope(x, rate, *REFERENCE_BAND)

    gmin, gmax = float(x.min()), float(x.max())
    degenerate = gmax <= gmin
    min_tail = int(round(cfg.min_tail_seconds * rate))

    starts = list(range(0, n - win + 1, win))
    tail_start = starts[-1] + win
    if n - tail_start >= min_tail:
        starts.append(tail_start)

    flagged: list[InvalidWindow] = []
    for s in starts:
        e = min(s + win, n)
        seg = x[s:e]
        reason = None
        if float(env_hf[s:e].mean()) > cfg.hf_ratio_threshold * float(env_ref[s:e].mean()):
            reason = "hf_noise"
        elif degenerate:
            reason = "flat"
        else:
            counts, _ = np.histogram(seg, bins=cfg.histogram_bins, range=(gmin, gmax))
            modal = int(np.argmax(counts))
            if counts[modal] > cfg.flat_bin_fraction * seg.size:
                reason = "saturation" if modal in (0, cfg.histogram_bins - 1) else "flat"
        if reason is not None:
            flagged.append(InvalidWindow(s, e, reason))

    # merge contiguous windows sharing a reason
    merged: list[InvalidWindow] = []
    for w in flagged:
        if merged and merged[-1].end == w.start and merged[-1].reason == w.reason:
            merged[-1] = InvalidWindow(merged[-1].start, w.end, w.reason)
        else:
            merged.append(w)

    masked = sum(w.end - w.start for w in merged)
    return InvalidMask(windows=tuple(merged), invalid_fraction=masked / n)


def excise_invalid(x: np.ndarray, mask: InvalidMask) -> np.ndarray:
    """Concatenate the valid spans, in order; window bounds are half-open."""
    x = np.asarray(x, dtype=float)
    n = x.size
    keep = []
    cursor = 0
    for w in mask.windows:
        if w.start < 0 or w.end > n:
            raise ParameterError(f"mask window [{w.start},{w.end}) outside signal of {n}")
        if w.start > cursor:
            keep.append(x[cursor : w.start])
        cursor = max(cursor, w.end)
    if cursor < n:
        keep.append(x[cursor:])
    if not keep:
        return np.empty(0, dtype=float)
    return np.concatenate(keep)


def is_mostly_invalid(mask: InvalidMask, fraction: float = 0.80) -> bool:
    """True iff strictly more than ``fraction`` of the samples are masked."""
    return mask.invalid_fraction > fraction
