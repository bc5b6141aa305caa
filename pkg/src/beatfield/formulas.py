"""Scalar feature formulas: rate-corrected QT, Hjorth parameters, entropies, LPC.

These are the building blocks of the per-beat feature table; each has a
closed-form contract that the unit suite checks directly.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .errors import ParameterError

#: Value written for quantities that are undefined for a beat (first-beat
#: intervals, divisions by zero, ...).  The z-scoring stage leaves all-sentinel
#: columns centered, so the sentinel never distorts scale.
IMPUTE_SENTINEL = 0.0


def qt_bazett(qt: float, rr: float) -> float:
    """QT corrected by the square root of the RR interval (both in seconds)."""
    if qt <= 0 or rr <= 0:
        return IMPUTE_SENTINEL
    return qt / math.sqrt(rr)


def qt_fridericia(qt: float, rr: float) -> float:
    """QT corrected by the cube root of the RR interval (both in seconds)."""
    if qt <= 0 or rr <= 0:
        return IMPUTE_SENTINEL
    return qt / rr ** (1.0 / 3.0)


def qt_sagie(qt_ms: float, rr: float) -> float:
    """Linear rate correction, QT in milliseconds, RR in seconds.

    Returns 1000*(qt_ms/1000 + 0.154*(1 - rr)) in milliseconds.
    """
    if qt_ms <= 0:
        return IMPUTE_SENTINEL
    return 1000.0 * (qt_ms / 1000.0 + 0.154 * (1.0 - rr))


def hjorth(x: np.ndarray, rate: float = 1.0) -> tuple[float, float, float]:
    """Activity, mobility, complexity of a segment.

    Activity is the population variance; mobility the normalized spread of the
    first derivative (first difference scaled by ``rate``); complexity the
    mobility ratio of derivative to signal.  Zero-variance input yields
    activity 0 and sentinel mobility/complexity.
    """
    x = np.asarray(x, dtype=float)
    if x.size < 3:
        raise ParameterError("hjorth needs at least 3 samples")
    activity = float(np.var(x))
    if activity <= 0.0:
        return 0.0, IMPUTE_SENTINEL, IMPUTE_SENTINEL
    dx = np.diff(x) * rate
    var_dx = float(np.var(dx))
    mobility = math.sqrt(var_dx / activity)
    if var_dx <= 0.0:
        return activity, mobility, IMPUTE_SENTINEL
    ddx = np.diff(dx) * rate
    mobility_dx = math.sqrt(float(np.var(ddx)) / var_dx)
    complexity = mobility_dx / mobility if mobility > 0 else IMPUTE_SENTINEL
    return activity, mobility, complexity


def _checked_probabilities(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ParameterError("probability vector must be 1-D and non-empty")
    if np.any(p < 0):
        raise ParameterError("probabilities must be non-negative")
    total = p.sum()
    if total <= 0:
        raise ParameterError("probabilities sum to zero")
    if abs(total - 1.0) > 1e-9:
        warnings.warn(f"probability vector sums to {total:.6g}; normalizing", stacklevel=3)
        p = p / total
    return p


def entropy_shannon(p: np.ndarray, base: float | None = None) -> float:
    """-sum p_i log p_i with 0*log0 := 0; natural log unless ``base`` given."""
    p = _checked_probabilities(p)
    nz = p[p > 0]
    h = float(-(nz * np.log(nz)).sum())
    if base is not None:
        h /= math.log(base)
    return h


def entropy_tsallis(p: np.ndarray, q: float = 2.0) -> float:
    """(1/(q-1)) * (1 - sum p_i^q); default entropic index 2."""
    p = _checked_probabilities(p)
    if q == 1.0:
        return entropy_shannon(p)
    return float((1.0 - (p**q).sum()) / (q - 1.0))


def entropy_renyi(p: np.ndarray, alpha: float = 2.0) -> float:
    """(1/(1-alpha)) * log(sum p_i^alpha); default order 2, natural log."""
    p = _checked_probabilities(p)
    if alpha == 1.0:
        return entropy_shannon(p)
    return float(math.log((p**alpha).sum()) / (1.0 - alpha))


def histogram_probabilities(x: np.ndarray, bins: int = 16) -> np.ndarray:
    """Equal-width amplitude histogram over the segment's range, normalized.

    A zero-range segment maps to a one-hot vector.
    """
    x = np.asarray(x, dtype=float)
    lo, hi = float(x.min()), float(x.max())
    if hi <= lo:
        p = np.zeros(bins)
        p[0] = 1.0
        return p
    counts, _ = np.histogram(x, bins=bins, range=(lo, hi))
    return counts / counts.sum()


def haar_level_energies(x: np.ndarray, levels: int = 3) -> np.ndarray:
    """Energies of the Haar detail bands plus the final approximation.

    Odd-length inputs drop their last sample at each level.  Levels that would
    need fewer than 2 samples are skipped.
    """
    cur = np.asarray(x, dtype=float)
    energies = []
    for _ in range(levels):
        if cur.size < 2:
            break
        if cur.size % 2:
            cur = cur[:-1]
        approx = (cur[0::2] + cur[1::2]) / math.sqrt(2.0)
        detail = (cur[0::2] - cur[1::2]) / math.sqrt(2.0)
        energies.append(float((detail**2).sum()))
        cur = approx
    energies.append(float((cur**2).sum()))
    return np.asarray(energies)


def wavelet_entropy(x: np.ndarray, levels: int = 3) -> float:
    """Shannon entropy of the normalized Haar band energies (natural log)."""
    e = haar_level_energies(x, levels)
    total = e.sum()
    if total <= 0:
        return 0.0
    return entropy_shannon(e / total)


def lpc_coefficients(x: np.ndarray, order: int = 10) -> tuple[np.ndarray, float]:
    """Linear-prediction coefficients via autocorrelation + Levinson-Durbin.

    Returns (phi, gain) with the positive predictor convention
    x_hat[n] = sum_k phi[k] * x[n-k-1]; gain is the final prediction-error
    variance.  Degenerate input (zero energy, too short) yields zeros.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n <= order:
        return np.zeros(order), 0.0
    r = np.empty(order + 1)
    for k in range(order + 1):
        r[k] = float(np.dot(x[: n - k], x[k:])) / n
    if r[0] <= 0.0:
        return np.zeros(order), 0.0
    # classic recursion with a[0]=1 and x_hat = -sum a_k x[n-k]
    a = np.zeros(order + 1)
    a[0] = 1.0
    err = r[0]
    for i in range(1, order + 1):
        acc = r[i] + float(np.dot(a[1:i], r[1:i][::-1]))
        k = -acc / err
        a[1 : i + 1] = a[1 : i + 1] + k * a[:i][::-1]
        err *= 1.0 - k * k
        if err <= 0.0:
            err = 0.0
            break
    return -a[1:], float(err)


def kmeans3(values: np.ndarray, max_iter: int = 20) -> np.ndarray:
    """Three-centroid Lloyd iteration seeded at (min, median, max).

    Empty clusters keep their previous centroid.  Returns centroids sorted
    ascending; duplicates are possible when the input has < 3 distinct values.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ParameterError("kmeans3 needs at least one value")
    centroids = np.array([v.min(), float(np.median(v)), v.max()])
    for _ in range(max_iter):
        d = np.abs(v[:, None] - centroids[None, :])
        assign = np.argmin(d, axis=1)
        new = centroids.copy()
        for k in range(3):
            members = v[assign == k]
            if members.size:
                new[k] = members.mean()
        if np.array_equal(new, centroids):
            break
        centroids = new
    return np.sort(centroids)
