"""Beat detection and piece cutting.

R candidates are local maxima of the 5-25 Hz magnitude envelope above half of
a rolling 90th percentile, vetoed where the 50-70 Hz envelope dominates the
1-8 Hz envelope, snapped to the local extremum of the raw signal.  P/Q/S/T are
peak/valley searches in physiologic windows around each R.  Pieces span the
midpoints between consecutive retained R peaks, covering the whole signal.

All decision rules here are causal within a bounded horizon, which is what
makes streaming emission reproduce batch rows bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import percentile_filter
from scipy.signal import find_peaks

from .config import SegmentationConfig
from .preprocess import band_envelope

R_BAND = (5.0, 25.0)
VETO_LOW_BAND = (1.0, 8.0)
VETO_HIGH_BAND = (50.0, 70.0)


@dataclass(frozen=True)
class Fiducials:
    p: int
    q: int
    r: int
    s: int
    t: int

    def __post_init__(self):
        if not (self.p < self.q < self.r < self.s < self.t):
            raise ValueError(f"fiducials out of order: {self}")

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.p, self.q, self.r, self.s, self.t)


@dataclass(frozen=True)
class Piece:
    """One beat's span [g, j] (inclusive) plus its fiducials; index is 1-based."""

    g: int
    j: int
    fid: Fiducials
    index: int

    def __post_init__(self):
        if not (self.g <= self.fid.p and self.fid.t <= self.j):
            raise ValueError(f"fiducials outside span: {self}")

    @property
    def length(self) -> int:
        return self.j - self.g + 1

    def samples(self, x: np.ndarray) -> np.ndarray:
        return x[self.g : self.j + 1]


def _snap_to_extremum(x_abs: np.ndarray, idx: int, half: int, max_iter: int = 10) -> int:
    n = x_abs.size
    for _ in range(max_iter):
        lo = max(0, idx - half)
        hi = min(n, idx + half + 1)
        best = lo + int(np.argmax(x_abs[lo:hi]))
        if best == idx or x_abs[best] <= x_abs[idx]:
            break
        idx = best
    return idx


def detect_r_peaks(
    x: np.ndarray, rate: float, config: SegmentationConfig | None = None
) -> np.ndarray:
    """Strictly increasing R-peak sample indices.

    Thresholds are relative, so amplitude scaling by any k > 0 leaves the
    result unchanged.  No candidates -> empty array.
    """
    cfg = config or SegmentationConfig()
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < int(2 * rate):
        return np.empty(0, dtype=int)

    env = band_envelope(x, rate, *R_BAND)
    size = min(n, max(3, int(round(cfg.rolling_seconds * rate))))
    rolling = percentile_filter(env, percentile=cfg.rolling_percentile, size=size, mode="nearest")
    threshold = cfg.peak_threshold_ratio * rolling

    refractory = max(1, int(round(cfg.refractory_seconds * rate)))
    peaks, _ = find_peaks(env)
    if peaks.size == 0:
        return np.empty(0, dtype=int)
    peaks = peaks[env[peaks] > threshold[peaks]]
    if peaks.size == 0:
        return np.empty(0, dtype=int)

    env_lo = band_envelope(x, rate, *VETO_LOW_BAND)
    env_hi = band_envelope(x, rate, *VETO_HIGH_BAND)
    peaks = peaks[env_hi[peaks] <= env_lo[peaks]]
    if peaks.size == 0:
        return np.empty(0, dtype=int)

    x_abs = np.abs(x)
    half = max(1, int(round(cfg.snap_seconds * rate)))
    snapped = sorted({_snap_to_extremum(x_abs, int(p), half) for p in peaks})

    # enforce the refractory period on the snapped locations
    kept: list[int] = []
    for p in snapped:
        if kept and p - kept[-1] < refractory:
            if x_abs[p] > x_abs[kept[-1]]:
                kept[-1] = p
        else:
            kept.append(p)
    return np.asarray(kept, dtype=int)


def refine_pqst(
    x: np.ndarray,
    rate: float,
    r_locs: np.ndarray,
    config: SegmentationConfig | None = None,
) -> list[Fiducials]:
    """Search peaks/valleys around each R; beats whose nominal windows leave
    the signal are dropped.

    Search windows are clipped to the midpoints toward the neighboring R
    peaks, which keeps every fiducial inside the beat's eventual piece span.
    """
    cfg = config or SegmentationConfig()
    x = np.asarray(x, dtype=float)
    n = x.size
    r_locs = np.asarray(r_locs, dtype=int)
    if np.any(np.diff(r_locs) <= 0):
        raise ValueError("r_locs must be strictly increasing")

    p_lo = int(round(cfg.p_lo_seconds * rate))
    p_hi = int(round(cfg.p_hi_seconds * rate))
    qs = int(round(cfg.q_window_seconds * rate))
    t_lo = int(round(cfg.t_lo_seconds * rate))
    t_hi = int(round(cfg.t_hi_seconds * rate))

    out: list[Fiducials] = []
    for i, r in enumerate(r_locs):
        if r - p_lo < 0 or r + t_hi > n - 1:
            continue  # nominal window outside signal bounds
        lo_bound = 0 if i == 0 else (int(r_locs[i - 1]) + r) // 2
        hi_bound = n - 1 if i == len(r_locs) - 1 else (r + int(r_locs[i + 1])) // 2 - 1

        q_lo = max(r - qs, lo_bound)
        if q_lo > r - 1:
            continue
        q = q_lo + int(np.argmin(x[q_lo:r]))

        s_hi = min(r + qs, hi_bound)
        if r + 1 > s_hi:
            continue
        s = r + 1 + int(np.argmin(x[r + 1 : s_hi + 1]))

        pw_lo = max(r - p_lo, lo_bound)
        pw_hi = min(r - p_hi, q - 1)
        if pw_lo > pw_hi:
            continue
        p = pw_lo + int(np.argmax(x[pw_lo : pw_hi + 1]))

        tw_lo = max(r + t_lo, s + 1)
        tw_hi = min(r + t_hi, hi_bound)
        if tw_lo > tw_hi:
            continue
        t = tw_lo + int(np.argmax(x[tw_lo : tw_hi + 1]))

        out.append(Fiducials(p=p, q=q, r=int(r), s=s, t=t))
    return out


def prune_close_beats(
    x: np.ndarray,
    fids: list[Fiducials],
    rate: float,
    config: SegmentationConfig | None = None,
    history: int = 32,
) -> list[Fiducials]:
    """Drop the more deviant beat of any pair closer than the minimum RR.

    Deviation is |R amplitude - reference median| where the reference is the
    median amplitude of up to ``history`` retained beats before the pair (the
    pair itself when none exist).  The causal reference keeps pruning
    decisions independent of later samples.
    """
    cfg = config or SegmentationConfig()
    x = np.asarray(x, dtype=float)
    min_rr = int(round(cfg.min_rr_seconds * rate))
    kept: list[Fiducials] = []
    for fid in sorted(fids, key=lambda f: f.r):
        if not kept or fid.r - kept[-1].r >= min_rr:
            kept.append(fid)
            continue
        prev = kept[-1]
        earlier = kept[:-1][-history:]
        if earlier:
            ref = float(np.median([x[f.r] for f in earlier]))
        else:
            ref = float(np.median([x[prev.r], x[fid.r]]))
        dev_prev = abs(x[prev.r] - ref)
        dev_new = abs(x[fid.r] - ref)
        if dev_new < dev_prev:
            kept[-1] = fid
        # ties keep the earlier beat
    return kept


def cut_pieces(x: np.ndarray, fids: list[Fiducials]) -> list[Piece]:
    """Contiguous pieces with boundaries at midpoints between consecutive R.

    The first piece starts at sample 0 and the last ends at the final sample,
    so the piece spans partition [0, n-1].  Zero beats -> empty list.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if not fids:
        return []
    fids = sorted(fids, key=lambda f: f.r)
    rs = [f.r for f in fids]
    mids = [(rs[i] + rs[i + 1]) // 2 for i in range(len(rs) - 1)]
    pieces: list[Piece] = []
    for c, fid in enumerate(fids):
        g = 0 if c == 0 else mids[c - 1]
        j = n - 1 if c == len(fids) - 1 else mids[c] - 1
        pieces.append(Piece(g=g, j=j, fid=fid, index=c + 1))
    return pieces


def segment(
    x: np.ndarray, rate: float, config: SegmentationConfig | None = None
) -> list[Piece]:
    """detect -> refine -> prune -> cut, the standard chain."""
    r = detect_r_peaks(x, rate, config)
    if r.size == 0:
        return []
    fids = refine_pqst(x, rate, r, config)
    fids = prune_close_beats(x, fids, rate, config)
    return cut_pieces(x, fids)


def dump_fiducials(pieces: list[Piece], path: str | Path) -> None:
    """Debug/oracle CSV: piece_index,p,q,r,s,t,g,j."""
    lines = ["piece_index,p,q,r,s,t,g,j"]
    for pc in pieces:
        f = pc.fid
        lines.append(f"{pc.index},{f.p},{f.q},{f.r},{f.s},{f.t},{pc.g},{pc.j}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
