"""Independent test oracles, kept free of the implementation's code paths."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def monotone_paths(n: int, m: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """All index paths from (0,0) to (n-1,m-1) with steps right/down/diagonal."""
    if n == 1 and m == 1:
        return (((0, 0),),)
    paths = []
    if n > 1:
        for p in monotone_paths(n - 1, m):
            paths.append(p + ((n - 1, m - 1),))
    if m > 1:
        for p in monotone_paths(n, m - 1):
            paths.append(p + ((n - 1, m - 1),))
    if n > 1 and m > 1:
        for p in monotone_paths(n - 1, m - 1):
            paths.append(p + ((n - 1, m - 1),))
    return tuple(paths)


def dtw_oracle(a, b) -> float:
    """Brute-force DTW: minimum over explicitly enumerated warping paths."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    best = None
    for path in monotone_paths(a.size, b.size):
        cost = sum(abs(a[i] - b[j]) for i, j in path)
        if best is None or cost < best:
            best = cost
    return best


def two_pass_variance(x) -> float:
    """Textbook two-pass variance with exact (fsum) accumulation."""
    import math

    xs = [float(v) for v in x]
    mean = math.fsum(xs) / len(xs)
    return math.fsum((v - mean) ** 2 for v in xs) / len(xs)
