"""Synthetic beat-train generator with ground-truth fiducials.

Each beat is a sum of Gaussian bumps (P, Q, R, S, T) at fixed offsets from
the R time, so the true landmark locations are known to the sample.  Used by
the test oracles and the demo scripts; not part of the processing pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: (offset seconds from R, amplitude, width sigma seconds) per wave.
WAVE_SHAPE = {
    "p": (-0.160, 0.12, 0.025),
    "q": (-0.030, -0.15, 0.008),
    "r": (0.000, 1.00, 0.012),
    "s": (0.030, -0.25, 0.008),
    "t": (0.250, 0.30, 0.060),
}

#: Margins keeping the refine search windows inside the signal.
LEAD_IN_SECONDS = 0.40
LEAD_OUT_SECONDS = 0.50


@dataclass(frozen=True)
class SyntheticBeats:
    signal: np.ndarray
    rate: float
    r_locs: np.ndarray                      # ground-truth R sample indices
    fiducials: dict[str, np.ndarray]        # per wave, ground-truth indices

    @property
    def n_beats(self) -> int:
        return self.r_locs.size


def beat_train(
    rate: float = 250.0,
    duration: float = 10.0,
    heart_rate_bpm: float = 60.0,
    rr_jitter: float = 0.0,
    amplitude: float = 1.0,
    baseline_amp: float = 0.0,
    baseline_freq: float = 0.33,
    noise_amp: float = 0.0,
    noise_freq: float = 80.0,
    rng: np.random.Generator | None = None,
    wave_shape: dict[str, tuple[float, float, float]] | None = None,
) -> SyntheticBeats:
    """Beat train at the given heart rate, optional RR jitter and 80 Hz noise.

    ``noise_amp`` is relative to the R amplitude.  Baseline drift spreads the
    amplitude histogram the way real baseline wander does.  ``wave_shape``
    overrides the per-wave (offset, amplitude, sigma) template.
    """
    rng = rng or np.random.default_rng(0)
    shapes = wave_shape or WAVE_SHAPE
    n = int(round(duration * rate))
    t = np.arange(n) / rate
    x = np.zeros(n)

    rr = 60.0 / heart_rate_bpm
    r_times = []
    cur = LEAD_IN_SECONDS
    while cur <= duration - LEAD_OUT_SECONDS:
        r_times.append(cur)
        step = rr * (1.0 + rr_jitter * float(rng.uniform(-1.0, 1.0))) if rr_jitter else rr
        cur += step

    fid: dict[str, list[int]] = {w: [] for w in shapes}
    for rt in r_times:
        for wave, (off, amp, sigma) in shapes.items():
            center = rt + off
            x += amplitude * amp * np.exp(-0.5 * ((t - center) / sigma) ** 2)
            fid[wave].append(int(round(center * rate)))

    if baseline_amp:
        x += amplitude * baseline_amp * np.sin(2 * np.pi * baseline_freq * t)
    if noise_amp:
        x += amplitude * noise_amp * np.sin(2 * np.pi * noise_freq * t)

    return SyntheticBeats(
        signal=x,
        rate=rate,
        r_locs=np.asarray(fid["r"], dtype=int),
        fiducials={w: np.asarray(v, dtype=int) for w, v in fid.items()},
    )


def ar2_process(
    c1: float, c2: float, n: int, rng: np.random.Generator, noise_std: float = 1.0
) -> np.ndarray:
    """Second-order autoregressive series x[t] = c1*x[t-1] + c2*x[t-2] + e."""
    x = np.zeros(n)
    e = rng.normal(0.0, noise_std, size=n)
    for i in range(2, n):
        x[i] = c1 * x[i - 1] + c2 * x[i - 2] + e[i]
    return x


def random_beat_train(rng: np.random.Generator, **overrides) -> SyntheticBeats:
    """Randomized fixture: heart rate, jitter and amplitude drawn from ranges."""
    params = dict(
        rate=250.0,
        duration=10.0,
        heart_rate_bpm=float(rng.uniform(55.0, 95.0)),
        rr_jitter=float(rng.uniform(0.0, 0.08)),
        amplitude=float(rng.uniform(0.8, 1.2)),
        rng=rng,
    )
    params.update(overrides)
    return beat_train(**params)
