#!/usr/bin/env python3
"""Write a directory of synthetic recordings for demos and end-to-end runs.

Rhythm-style datasets get one of four class labels with class-dependent
morphology tweaks (irregular RR for AFib, noise bursts for Noise); alarm-style
datasets get arrhythmia-type labels with a true/false flag.
"""

import argparse
from pathlib import Path

import numpy as np

from beatfield.ingest import AlarmLabel, Recording, RhythmLabel, save_recording
from beatfield.synth import beat_train

RATE = 250.0


def make_rhythm(rng: np.random.Generator, cls: str):
    if cls == "Normal":
        sb = beat_train(rate=RATE, duration=float(rng.uniform(10, 14)),
                        heart_rate_bpm=float(rng.uniform(58, 80)),
                        rr_jitter=0.02, baseline_amp=0.08, rng=rng)
        return sb.signal
    if cls == "AFib":
        sb = beat_train(rate=RATE, duration=float(rng.uniform(10, 14)),
                        heart_rate_bpm=float(rng.uniform(95, 130)),
                        rr_jitter=0.25, baseline_amp=0.08, rng=rng)
        return sb.signal
    if cls == "Other":
        sb = beat_train(rate=RATE, duration=float(rng.uniform(10, 14)),
                        heart_rate_bpm=float(rng.uniform(40, 55)),
                        rr_jitter=0.10, baseline_amp=0.08, rng=rng)
        return sb.signal
    sb = beat_train(rate=RATE, duration=float(rng.uniform(10, 14)),
                    heart_rate_bpm=float(rng.uniform(60, 90)),
                    rr_jitter=0.05, baseline_amp=0.08, noise_amp=0.6, rng=rng)
    return sb.signal


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output", required=True)
    parser.add_argument("--style", choices=("afib2017", "alarm2015"), default="afib2017")
    parser.add_argument("--per-class", type=int, default=6)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    n = 0
    if args.style == "afib2017":
        for cls in ("Normal", "AFib", "Other", "Noise"):
            for i in range(args.per_class):
                sig = make_rhythm(rng, cls)
                rec = Recording(id=f"{cls.lower()}{i:03d}", sample_rate=RATE,
                                leads=(("II", sig),), label=RhythmLabel(cls))
                save_recording(rec, out / rec.id)
                n += 1
    else:
        for typ in ("ASY", "EBR", "ET", "VF", "VT"):
            for i in range(args.per_class):
                is_true = bool(rng.integers(0, 2))
                sb = beat_train(rate=RATE, duration=float(rng.uniform(10, 14)),
                                heart_rate_bpm=float(rng.uniform(55, 95)),
                                rr_jitter=0.05, baseline_amp=0.08, rng=rng)
                rec = Recording(id=f"{typ.lower()}{i:03d}", sample_rate=RATE,
                                leads=(("II", sb.signal),), label=AlarmLabel(typ, is_true))
                save_recording(rec, out / rec.id)
                n += 1
    print(f"wrote {n} recordings to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
