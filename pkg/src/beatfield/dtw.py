"""Dynamic time warping distance for piece similarity.

Classic full-window dynamic program with absolute point cost and symmetric
steps (diagonal, down, right).  Pieces are compared after linear resampling
to a fixed length and z-normalization, so the distance reflects shape, not
duration or amplitude.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import ParameterError


@njit(cache=True)
def _dtw_core(a: np.ndarray, b: np.ndarray) -> float:
    n = a.shape[0]
    m = b.shape[0]
    prev = np.empty(m)
    cur = np.empty(m)
    prev[0] = abs(a[0] - b[0])
    for j in range(1, m):
        prev[j] = prev[j - 1] + abs(a[0] - b[j])
    for i in range(1, n):
        cur[0] = prev[0] + abs(a[i] - b[0])
        for j in range(1, m):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = best + abs(a[i] - b[j])
        prev, cur = cur, prev
    return prev[m - 1]


def dtw_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Minimal cumulative |a_i - b_j| over monotone alignments.

    Symmetric; zero iff the sequences are identical.  Empty input raises.
    """
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    if a.ndim != 1 or b.ndim != 1 or a.size == 0 or b.size == 0:
        raise ParameterError("dtw_distance needs two non-empty 1-D sequences")
    return float(_dtw_core(a, b))


def piece_profile(samples: np.ndarray, n_points: int = 64) -> np.ndarray:
    """Resample a piece to ``n_points`` and z-normalize (zero-spread -> zeros)."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ParameterError("empty piece")
    if samples.size == 1:
        resampled = np.full(n_points, samples[0])
    else:
        src = np.linspace(0.0, samples.size - 1.0, n_points)
        resampled = np.interp(src, np.arange(samples.size), samples)
    sd = resampled.std()
    if sd == 0.0:
        return np.zeros(n_points)
    return (resampled - resampled.mean()) / sd


def consecutive_distances(profiles: list[np.ndarray]) -> np.ndarray:
    """DTW distance between each adjacent pair of piece profiles."""
    return np.asarray(
        [dtw_distance(profiles[i], profiles[i + 1]) for i in range(len(profiles) - 1)]
    )
