"""Per-piece feature extraction: 103 features in three groups.

Morphological (39), statistical (47) and frequency (17) features per beat.
A fixed subset of 44 features is marked ``starred``; starred features are
exported raw and excluded from the receptive-field (level-2) functions.
The schema order below is the export order; consumers must read it from the
emitted manifest rather than assume it.

Undefined quantities (first-beat intervals, divisions by zero, degenerate
windows) are imputed with 0 and counted, so every vector is finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import detrend, get_window, periodogram
from scipy.stats import trim_mean

from .errors import TooFewPiecesError
from .formulas import (
    IMPUTE_SENTINEL,
    entropy_renyi,
    entropy_shannon,
    entropy_tsallis,
    histogram_probabilities,
    hjorth,
    kmeans3,
    lpc_coefficients,
    qt_bazett,
    qt_fridericia,
    qt_sagie,
    wavelet_entropy,
)
from .segmentation import Piece

WAVES = ("p", "q", "r", "s", "t")
GROUP_MORPHOLOGICAL = "morphological"
GROUP_STATISTICAL = "statistical"
GROUP_FREQUENCY = "frequency"

LPC_ORDER = 10
SUBWAVE_HALF_SECONDS = 0.060
AMPLITUDE_HISTOGRAM_BINS = 16
STFT_WINDOW_SECONDS = 0.128
ROLLOFF_FRACTION = 0.85
STFT_ENERGY_FRACTION = 0.80
TRIM_FRACTION = 0.10
PSD_BANDS = ((0.0, 2.0), (2.0, 4.0), (4.0, 10.0), (10.0, 150.0))
RR_CLUSTER_HISTORY = 32
MIN_FREQUENCY_SAMPLES = 8


@dataclass(frozen=True)
class FeatureSchema:
    name: str
    group: str
    starred: bool
    index: int


def _build_schema() -> tuple[FeatureSchema, ...]:
    entries: list[FeatureSchema] = []

    def add(name: str, group: str, starred: bool = False) -> None:
        entries.append(FeatureSchema(name, group, starred, len(entries)))

    # --- morphological (39) ---
    for w in WAVES:
        add(f"amp_{w}", GROUP_MORPHOLOGICAL)
    for w in WAVES:
        add(f"{w}{w}_interval", GROUP_MORPHOLOGICAL)
    for w in WAVES:
        add(f"{w}{w}_interval_diff", GROUP_MORPHOLOGICAL)
    add("rr_energy", GROUP_MORPHOLOGICAL)
    add("amp_diff_sq", GROUP_MORPHOLOGICAL)
    for name in ("amp_ratio_sr", "amp_ratio_sr_wrt_q", "amp_ratio_tr", "amp_ratio_qr"):
        add(name, GROUP_MORPHOLOGICAL)
    for pair in ("qs", "qr", "qt", "pq"):
        add(f"width_{pair}", GROUP_MORPHOLOGICAL)
    for pair in ("st", "qr", "rs", "sx", "pq"):
        add(f"slope_{pair}", GROUP_MORPHOLOGICAL)
    add("st_slope_negative", GROUP_MORPHOLOGICAL, starred=True)
    add("st_zero_cross_ms", GROUP_MORPHOLOGICAL, starred=True)
    for name in ("qt_bazett", "qt_fridericia", "qt_sagie"):
        add(name, GROUP_MORPHOLOGICAL)
    for k in (1, 2, 3):
        add(f"rr_cluster_dist_{k}", GROUP_MORPHOLOGICAL, starred=True)
    add("pprr_ratio", GROUP_MORPHOLOGICAL)

    # --- statistical (47) ---
    for w in WAVES:
        add(f"wavelet_entropy_{w}", GROUP_STATISTICAL)
    for w in WAVES:
        for p in ("activity", "mobility", "complexity"):
            add(f"hjorth_{p}_{w}", GROUP_STATISTICAL)
    for w in WAVES:
        for e in ("shannon", "tsallis", "renyi"):
            add(f"{e}_entropy_{w}", GROUP_STATISTICAL, starred=True)
    add("zero_crossing_ratio", GROUP_STATISTICAL)
    for k in range(1, LPC_ORDER + 1):
        add(f"lpc_{k}", GROUP_STATISTICAL, starred=True)
    add("lpc_gain", GROUP_STATISTICAL, starred=True)

    # --- frequency (17) ---
    for name in ("fft_centroid", "fft_rolloff", "fft_kurtosis", "fft_skewness"):
        add(name, GROUP_FREQUENCY, starred=True)
    for name in (
        "stft_energy",
        "stft_centroid",
        "stft_kurtosis",
        "stft_rolloff",
        "stft_mode",
        "stft_skewness",
        "stft_energy80_hz",
        "stft_trimmed_mean",
        "stft_top2_diff",
    ):
        add(name, GROUP_FREQUENCY, starred=True)
    for lo, hi in PSD_BANDS:
        add(f"psd_band_{lo:g}_{hi:g}".replace(".", "p"), GROUP_FREQUENCY)

    return tuple(entries)


SCHEMA: tuple[FeatureSchema, ...] = _build_schema()
N_FEATURES = len(SCHEMA)
STARRED_MASK = np.array([f.starred for f in SCHEMA])
UNSTARRED_INDICES = np.flatnonzero(~STARRED_MASK)
N_UNSTARRED = int(UNSTARRED_INDICES.size)

assert N_FEATURES == 103 and int(STARRED_MASK.sum()) == 44 and N_UNSTARRED == 59


def feature_names() -> tuple[str, ...]:
    return tuple(f.name for f in SCHEMA)


@dataclass
class ImputationCounter:
    count: int = 0

    def imp(self, n: int = 1) -> float:
        self.count += n
        return IMPUTE_SENTINEL


@dataclass(frozen=True)
class Level1Vector:
    values: np.ndarray
    index: int = 0
    schema: tuple[FeatureSchema, ...] = field(default=SCHEMA, repr=False)

    def __post_init__(self):
        if self.values.shape != (N_FEATURES,):
            raise ValueError(f"expected {N_FEATURES} values, got {self.values.shape}")


def _sdiv(a: float, b: float, counter: ImputationCounter) -> float:
    if b == 0.0:
        return counter.imp()
    return a / b


def _lstsq_slope(seg: np.ndarray, rate: float) -> float:
    t = np.arange(seg.size) / rate
    return float(np.polyfit(t, seg, 1)[0])


def extract_morphological(
    piece: Piece,
    x: np.ndarray,
    rate: float,
    counter: ImputationCounter,
    prev: Piece | None = None,
    prev2: Piece | None = None,
    rr_window: np.ndarray | None = None,
) -> list[float]:
    """39 time-domain features; inter-beat quantities use the previous beat.

    ``rr_window`` is the trailing RR-interval history (seconds, newest last)
    used by the running 3-means cluster distances; this is the only feature
    with cross-beat state beyond the two previous beats.
    """
    f = piece.fid
    out: list[float] = []

    out.extend(float(x[i]) for i in f.as_tuple())

    # integer index differences first, one division after: equal intervals
    # come out bit-equal, so interval differences of identical beats are 0
    if prev is not None:
        intervals = {w: (getattr(f, w) - getattr(prev.fid, w)) / rate for w in WAVES}
    else:
        intervals = None
    if prev is not None and prev2 is not None:
        prev_intervals = {
            w: (getattr(prev.fid, w) - getattr(prev2.fid, w)) / rate for w in WAVES
        }
    else:
        prev_intervals = None

    for w in WAVES:
        out.append(intervals[w] if intervals is not None else counter.imp())
    for w in WAVES:
        out.append(
            intervals[w] - prev_intervals[w] if prev_intervals is not None else counter.imp()
        )

    if prev is not None:
        seg = x[prev.fid.r : f.r]
        out.append(float(np.dot(seg, seg)))
    else:
        out.append(counter.imp())

    amp = {w: float(x[getattr(f, w)]) for w in WAVES}
    out.append(amp["s"] - amp["q"])
    out.append(_sdiv(amp["s"], amp["r"], counter))
    out.append(_sdiv(amp["s"] - amp["q"], amp["r"] - amp["q"], counter))
    out.append(_sdiv(amp["t"], amp["r"], counter))
    out.append(_sdiv(amp["q"], amp["r"], counter))

    out.append((f.s - f.q) / rate)
    out.append((f.r - f.q) / rate)
    out.append((f.t - f.q) / rate)
    out.append((f.q - f.p) / rate)

    def slope(a: int, b: int) -> float:
        return (float(x[b]) - float(x[a])) / ((b - a) / rate)

    out.append(slope(f.s, f.t))
    out.append(slope(f.q, f.r))
    out.append(slope(f.r, f.s))
    sx_end = min(f.s + int(round(0.05 * rate)), piece.j)
    if sx_end > f.s:
        out.append(_lstsq_slope(x[f.s : sx_end + 1], rate))
    else:
        out.append(counter.imp())
    out.append(slope(f.p, f.q))

    st_seg = x[f.s : f.t + 1]
    out.append(1.0 if _lstsq_slope(st_seg, rate) < 0 else 0.0)
    st_detr = detrend(st_seg, type="linear")
    cross = np.flatnonzero(st_detr[:-1] * st_detr[1:] < 0)
    if cross.size:
        out.append((int(cross[0]) + 1) * 1000.0 / rate)
    else:
        out.append(counter.imp())

    qt = (f.t - f.q) / rate
    if prev is not None:
        rr = (f.r - prev.fid.r) / rate
        out.append(qt_bazett(qt, rr))
        out.append(qt_fridericia(qt, rr))
        out.append(qt_sagie(qt * 1000.0, rr))
    else:
        out.extend(counter.imp() for _ in range(3))

    if rr_window is not None and rr_window.size:
        centroids = kmeans3(rr_window[-RR_CLUSTER_HISTORY:])
        out.extend(float(abs(rr_window[-1] - c)) for c in centroids)
    else:
        out.extend(counter.imp() for _ in range(3))

    if intervals is not None and intervals["r"] != 0.0:
        out.append(intervals["p"] / intervals["r"])
    else:
        out.append(counter.imp())

    return out


def _subwave(piece: Piece, x: np.ndarray, rate: float, fid_idx: int) -> np.ndarray:
    half = int(round(SUBWAVE_HALF_SECONDS * rate))
    lo = max(piece.g, fid_idx - half)
    hi = min(piece.j, fid_idx + half)
    return x[lo : hi + 1]


def extract_statistical(
    piece: Piece, x: np.ndarray, rate: float, counter: ImputationCounter
) -> list[float]:
    """47 features: per-wave wavelet entropy, Hjorth and amplitude entropies
    over +/-60 ms windows, plus whole-piece zero-crossing ratio and LPC."""
    f = piece.fid
    out: list[float] = []
    windows = [_subwave(piece, x, rate, getattr(f, w)) for w in WAVES]

    for w in windows:
        out.append(wavelet_entropy(w))

    for w in windows:
        if w.size < 3:
            out.extend(counter.imp() for _ in range(3))
            continue
        act, mob, comp = hjorth(w, rate)
        if act == 0.0:
            counter.imp(2)
        out.extend((act, mob, comp))

    for w in windows:
        p = histogram_probabilities(w, bins=AMPLITUDE_HISTOGRAM_BINS)
        out.append(entropy_shannon(p))
        out.append(entropy_tsallis(p, q=2.0))
        out.append(entropy_renyi(p, alpha=2.0))

    seg = piece.samples(x)
    crossings = int(np.count_nonzero(seg[:-1] * seg[1:] < 0))
    out.append(crossings / seg.size)

    coeffs, gain = lpc_coefficients(seg, order=LPC_ORDER)
    if not np.any(coeffs) and gain == 0.0:
        counter.imp(LPC_ORDER + 1)
    out.extend(float(c) for c in coeffs)
    out.append(gain)

    return out


def _stft_average(seg: np.ndarray, rate: float) -> tuple[np.ndarray, np.ndarray, float]:
    """(freqs, frame-averaged magnitude spectrum, mean per-frame energy).

    128 ms Hann window with 50% hop; pieces shorter than one window fall back
    to a single whole-piece frame.
    """
    n = seg.size
    nper = min(n, max(MIN_FREQUENCY_SAMPLES, int(round(STFT_WINDOW_SECONDS * rate))))
    hop = max(1, nper // 2)
    win = get_window("hann", nper, fftbins=True)
    freqs = np.fft.rfftfreq(nper, d=1.0 / rate)
    mags = []
    energies = []
    for start in range(0, n - nper + 1, hop):
        frame = seg[start : start + nper] * win
        m = np.abs(np.fft.rfft(frame))
        mags.append(m)
        energies.append(float((m * m).sum()))
    avg = np.mean(mags, axis=0)
    return freqs, avg, float(np.mean(energies))


def _distribution_moments(
    freqs: np.ndarray, weights: np.ndarray, counter: ImputationCounter
) -> tuple[float, float, float]:
    """(centroid, kurtosis, skewness) of a spectrum treated as a distribution.

    Kurtosis is the plain standardized fourth moment (not excess)."""
    total = float(weights.sum())
    if total <= 0.0:
        return counter.imp(), counter.imp(), counter.imp()
    p = weights / total
    centroid = float((freqs * p).sum())
    var = float((((freqs - centroid) ** 2) * p).sum())
    if var <= 0.0:
        return centroid, counter.imp(), counter.imp()
    sd = np.sqrt(var)
    z = (freqs - centroid) / sd
    kurt = float(((z**4) * p).sum())
    skew = float(((z**3) * p).sum())
    return centroid, kurt, skew


def _rolloff(freqs: np.ndarray, mags: np.ndarray, fraction: float, counter: ImputationCounter) -> float:
    energy = mags * mags
    total = float(energy.sum())
    if total <= 0.0:
        return counter.imp()
    idx = int(np.searchsorted(np.cumsum(energy), fraction * total))
    return float(freqs[min(idx, freqs.size - 1)])


def extract_frequency(
    piece: Piece, x: np.ndarray, rate: float, counter: ImputationCounter
) -> list[float]:
    """17 features: FFT-spectrum statistics, STFT statistics, band powers."""
    seg = piece.samples(x)
    if seg.size < MIN_FREQUENCY_SAMPLES:
        return [counter.imp() for _ in range(17)]
    out: list[float] = []

    freqs = np.fft.rfftfreq(seg.size, d=1.0 / rate)
    mag = np.abs(np.fft.rfft(seg))
    centroid, kurt, skew = _distribution_moments(freqs, mag, counter)
    out.append(centroid)
    out.append(_rolloff(freqs, mag, ROLLOFF_FRACTION, counter))
    out.append(kurt)
    out.append(skew)

    sfreqs, savg, senergy = _stft_average(seg, rate)
    scentroid, skurt, sskew = _distribution_moments(sfreqs, savg, counter)
    out.append(senergy)
    out.append(scentroid)
    out.append(skurt)
    out.append(_rolloff(sfreqs, savg, ROLLOFF_FRACTION, counter))
    out.append(float(sfreqs[int(np.argmax(savg))]))
    out.append(sskew)
    out.append(_rolloff(sfreqs, savg, STFT_ENERGY_FRACTION, counter))
    out.append(float(trim_mean(savg, TRIM_FRACTION)))
    if savg.size >= 2:
        top2 = np.partition(savg, -2)[-2:]
        out.append(float(top2[1] - top2[0]))
    else:
        out.append(counter.imp())

    pf, pxx = periodogram(seg - seg.mean(), fs=rate, window="boxcar", scaling="spectrum")
    for lo, hi in PSD_BANDS:
        out.append(float(pxx[(pf >= lo) & (pf < hi)].sum()))

    return out


def extract_level1(
    x: np.ndarray,
    rate: float,
    pieces: list[Piece],
    min_pieces: int = 4,
) -> tuple[np.ndarray, ImputationCounter]:
    """One 103-vector per piece; recordings with < ``min_pieces`` are rejected.

    The RR-cluster feature folds over the beat sequence left-to-right, so the
    matrix is computed sequentially within a recording; rows are otherwise
    independent.
    """
    x = np.asarray(x, dtype=float)
    if len(pieces) < min_pieces:
        raise TooFewPiecesError(len(pieces), min_pieces)
    counter = ImputationCounter()
    rows = np.empty((len(pieces), N_FEATURES), dtype=float)
    rr_history: list[float] = []
    for c, piece in enumerate(pieces):
        prev = pieces[c - 1] if c >= 1 else None
        prev2 = pieces[c - 2] if c >= 2 else None
        if prev is not None:
            rr_history.append((piece.fid.r - prev.fid.r) / rate)
        rr_window = np.asarray(rr_history[-RR_CLUSTER_HISTORY:]) if prev is not None else None
        row = extract_morphological(piece, x, rate, counter, prev, prev2, rr_window)
        row += extract_statistical(piece, x, rate, counter)
        row += extract_frequency(piece, x, rate, counter)
        vec = np.asarray(row, dtype=float)
        bad = ~np.isfinite(vec)
        if bad.any():
            counter.imp(int(bad.sum()))
            vec[bad] = IMPUTE_SENTINEL
        rows[c] = vec
    return rows, counter
