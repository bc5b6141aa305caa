"""Acceptance suite: one test per criterion, each printing a PASS/SKIP line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines alongside the pytest verdicts.
"""

import itertools
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from beatfield.config import PipelineConfig, Scenario
from beatfield.dtw import dtw_distance
from beatfield.evalprep import (
    AugmentPolicy,
    ConfusionCounts,
    DatasetEntry,
    augment_replicate,
    kfold_split,
    score_2015,
    score_2017,
)
from beatfield.formulas import (
    entropy_renyi,
    entropy_shannon,
    entropy_tsallis,
    hjorth,
    qt_bazett,
    qt_fridericia,
    qt_sagie,
)
from beatfield.ingest import Recording, RhythmLabel
from beatfield.matching import rf_bounds
from beatfield.matrixio import load_manifest, write_manifest
from beatfield.pipeline import featurize_directory, featurize_signal, stream_recording
from beatfield.segmentation import detect_r_peaks
from beatfield.synth import random_beat_train

from oracles import monotone_paths


def _ok(name: str) -> None:
    print(f"\n[ACCEPTANCE] {name}: PASS")


def _skip(name: str, reason: str) -> None:
    print(f"\n[ACCEPTANCE] {name}: SKIP ({reason})")
    pytest.skip(reason)


# ---------------------------------------------------------------------------
# 1. challenge-score arithmetic reproduces the reference values (1e-9, < 1 s)


def test_scoring_formula_reproduction():
    start = time.monotonic()
    assert abs(score_2017(92.0, 82.0, 75.0) - 83.0) <= 1e-9
    # the reference value carries two decimals; compare at that precision
    assert abs(round(score_2017(99.42, 98.38, 98.53), 2) - 98.78) <= 1e-9
    assert abs(score_2015(ConfusionCounts(9, 9, 1, 1)) - 75.0) <= 1e-9
    assert abs(score_2015(ConfusionCounts(1, 1, 0, 0)) - 100.0) <= 1e-9
    assert time.monotonic() - start < 1.0
    _ok("scoring-formulas")


# ---------------------------------------------------------------------------
# 2. DTW equals the brute-force warping-path oracle, exhaustively (< 30 s)


def _all_sequences(length: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1, 2), repeat=length)), dtype=np.int16)


def _oracle_all_pairs(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """min over explicitly enumerated monotone paths, vectorized over pairs."""
    n, m = A.shape[1], B.shape[1]
    cells: dict[tuple[int, int], np.ndarray] = {}

    def cell(i: int, j: int) -> np.ndarray:
        key = (i, j)
        if key not in cells:
            cells[key] = np.abs(A[:, i, None].astype(np.int16) - B[None, :, j])
        return cells[key]

    best: np.ndarray | None = None
    for path in monotone_paths(n, m):
        cost = cell(*path[0]).copy()
        for step in path[1:]:
            cost += cell(*step)
        best = cost if best is None else np.minimum(best, cost)
    return best


def test_dtw_exhaustive_against_oracle():
    start = time.monotonic()
    seqs = {length: _all_sequences(length) for length in range(1, 7)}
    floats = {
        length: [row.astype(float) for row in arr] for length, arr in seqs.items()
    }
    for n in range(1, 7):
        for m in range(n, 7):
            A, B = seqs[n], seqs[m]
            oracle = _oracle_all_pairs(A, B)
            fa, fb = floats[n], floats[m]
            for ia in range(len(fa)):
                row = oracle[ia]
                a = fa[ia]
                for ib in range(len(fb)):
                    expected = float(row[ib])
                    assert dtw_distance(a, fb[ib]) == expected
                    if n != m:
                        assert dtw_distance(fb[ib], a) == expected
    elapsed = time.monotonic() - start
    assert elapsed < 30.0, f"took {elapsed:.1f}s"
    _ok(f"dtw-exhaustive-oracle ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 3. receptive-field bounds match the scenario formulas, exhaustively (< 10 s)


def test_rf_bounds_exhaustive():
    start = time.monotonic()
    rng = np.random.default_rng(0)
    for l in range(4, 31):
        for h in range(1, l + 1):
            f = rf_bounds(Scenario.offline(), h, l)
            assert (f.start, f.end) == (1, l)

            f = rf_bounds(Scenario.incremental(), h, l)
            assert (f.start, f.end) == (min(h - 3, 1), h)
            if h == 1:
                assert sum(1 for i in range(f.start, f.end + 1) if i <= 0) == 3

            for e in range(2, 11):
                f = rf_bounds(Scenario.fixed(e), h, l)
                assert (f.start, f.end) == (h - e + 1, h)
                if h == 1:
                    assert sum(1 for i in range(f.start, f.end + 1) if i <= 0) == e - 1

        for _ in range(3):
            distances = rng.uniform(0.0, 2.0, size=l - 1)
            tau = 1.0
            starts = [1] + [j + 2 for j, d in enumerate(distances) if d > tau]
            for h in range(1, l + 1):
                f = rf_bounds(Scenario.event(threshold=tau), h, l, event_starts=starts)
                end = h - 1
                eligible = [s for s in starts if s <= end]
                expected_start = max(eligible) if eligible else end
                if end - expected_start + 1 < 2:
                    expected_start = end - 1
                assert (f.start, f.end) == (expected_start, end)
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    _ok(f"rf-bounds-exhaustive ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 4. batch/stream bit-identical rows for 50 random recordings (< 2 min)


def test_batch_stream_equivalence():
    start = time.monotonic()
    rng = np.random.default_rng(2024)
    scenarios = {"incremental": Scenario.incremental(), "event": Scenario.event()}
    for trial in range(50):
        sb = random_beat_train(rng, duration=8.0)
        kind = "incremental" if trial % 2 == 0 else "event"
        config = PipelineConfig(scenario=scenarios[kind])
        batch, _, _ = featurize_signal(sb.signal, sb.rate, config)
        rec = Recording(id=f"t{trial}", sample_rate=sb.rate, leads=(("II", sb.signal),))
        rows = stream_recording(rec, config, frame_seconds=1.0)
        assert [h for h, _ in rows] == list(range(1, batch.values.shape[0] + 1))
        streamed = np.vstack([r for _, r in rows])
        assert np.array_equal(streamed, batch.values), (kind, trial)
    elapsed = time.monotonic() - start
    assert elapsed < 120.0, f"took {elapsed:.1f}s"
    _ok(f"batch-stream-equivalence ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 5. matrix schema: 398 columns, 44 starred, group counts per the tables


def test_matrix_schema_and_manifest(tmp_path):
    manifest = load_manifest(write_manifest(tmp_path))
    assert len(manifest["columns"]) == 398
    assert len(manifest["level1"]) == 103
    assert sum(1 for f in manifest["level1"] if f["starred"]) == 44
    groups = {}
    for f in manifest["level1"]:
        groups[f["group"]] = groups.get(f["group"], 0) + 1
    assert groups == {"morphological": 39, "statistical": 47, "frequency": 17}
    assert len(manifest["columns"]) == 103 + 5 * (103 - 44)
    rng = np.random.default_rng(5)
    sb = random_beat_train(rng, duration=10.0)
    sm, _, _ = featurize_signal(sb.signal, sb.rate, PipelineConfig(scenario=Scenario.offline()))
    assert sm.values.shape[1] == 398
    _ok("matrix-schema-398-44")


# ---------------------------------------------------------------------------
# 6. formula unit suite at stated tolerances


def test_formula_unit_suite():
    assert abs(qt_bazett(0.40, 1.0) - 0.40) <= 1e-9
    assert abs(qt_bazett(0.36, 0.81) - 0.40) <= 1e-9
    assert abs(qt_bazett(0.40, 0.25) - 0.80) <= 1e-9
    assert abs(qt_fridericia(0.40, 1.0) - 0.40) <= 1e-9
    assert abs(qt_fridericia(0.40, 0.125) - 0.80) <= 1e-9
    assert abs(qt_sagie(400.0, 1.0) - 400.0) <= 1e-9

    act, _, _ = hjorth(np.full(64, 2.0))
    assert act == 0.0

    rate, f = 1000.0, 4.0
    t = np.arange(0, 2, 1 / rate)
    _, mob, _ = hjorth(np.sin(2 * np.pi * f * t), rate)
    assert abs(mob - 2 * np.pi * f) <= 0.05 * 2 * np.pi * f

    p = np.full(4, 0.25)
    assert abs(entropy_shannon(p) - math.log(4)) <= 1e-9
    assert abs(entropy_tsallis(p, 2) - 0.75) <= 1e-9
    assert abs(entropy_renyi(p, 2) - math.log(4)) <= 1e-9
    one_hot = np.array([1.0, 0.0, 0.0])
    assert abs(entropy_shannon(one_hot)) <= 1e-9
    assert abs(entropy_tsallis(one_hot, 2)) <= 1e-9
    assert abs(entropy_renyi(one_hot, 2)) <= 1e-9
    _ok("formula-unit-suite")


# ---------------------------------------------------------------------------
# 7. segmentation accuracy on 100 randomized fixtures (< 1 min)


def _r_recall(noise_amp: float, n_fixtures: int = 100) -> float:
    rng = np.random.default_rng(77)
    total = hit = 0
    for _ in range(n_fixtures):
        sb = random_beat_train(rng, noise_amp=noise_amp)
        peaks = detect_r_peaks(sb.signal, sb.rate)
        tol = int(round(0.02 * sb.rate))
        for true_r in sb.r_locs:
            total += 1
            if peaks.size and np.min(np.abs(peaks - true_r)) <= tol:
                hit += 1
    return hit / total


def test_segmentation_accuracy():
    start = time.monotonic()
    clean = _r_recall(0.0)
    noisy = _r_recall(0.2)
    assert clean >= 0.99, f"clean recall {clean:.4f}"
    assert noisy >= 0.95, f"noisy recall {noisy:.4f}"
    elapsed = time.monotonic() - start
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    _ok(f"segmentation-accuracy (clean {clean:.3f}, noisy {noisy:.3f}, {elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 8. augmentation counts and fold-leakage over 100 seeds


def test_augmentation_counts_and_leakage():
    table = {"Normal": 5050, "AFib": 738, "Other": 2456, "Noise": 284}
    data = [
        DatasetEntry(uid=f"{cls}{i}", source_id=f"{cls}{i}", label=RhythmLabel(cls))
        for cls, n in table.items()
        for i in range(n)
    ]
    out = augment_replicate(data, AugmentPolicy("afib2017"), np.random.default_rng(0))
    counts = {cls: sum(1 for e in out if e.class_key == cls) for cls in table}
    assert counts == {"Normal": 8050, "AFib": 4738, "Other": 7456, "Noise": 3284}

    small = [
        DatasetEntry(uid=f"{cls}{i}", source_id=f"{cls}{i}", label=RhythmLabel(cls))
        for cls, n in (("Normal", 12), ("AFib", 9), ("Other", 10), ("Noise", 8))
        for i in range(n)
    ]
    policy = AugmentPolicy(
        "afib2017", additions={"Normal": 15, "AFib": 15, "Other": 15, "Noise": 15}
    )
    for seed in range(100):
        augmented = augment_replicate(small, policy, np.random.default_rng(seed))
        plan = kfold_split(augmented, k=4, seed=seed)
        fold_by_source: dict[str, int] = {}
        for e in augmented:
            f = plan.fold_of(e)
            assert fold_by_source.setdefault(e.source_id, f) == f, seed
    _ok("augmentation-and-fold-leakage")


# ---------------------------------------------------------------------------
# 9. dataset-conditional: PhysioNet 2017 featurize smoke run


def test_physionet2017_smoke():
    data_dir = os.environ.get("BEATFIELD_PHYSIONET2017", "data/physionet2017")
    if not Path(data_dir).is_dir() or not any(Path(data_dir).glob("*.csv")):
        _skip("physionet2017-smoke", f"dataset not present at {data_dir}")
    out_dir = Path(data_dir).parent / "physionet2017_features"
    report = featurize_directory(
        data_dir, out_dir, PipelineConfig(dataset_style="afib2017", scenario=Scenario.offline())
    )
    assert report["n_recordings"] == len(report["accepted"]) + len(report["rejected"])
    for rej in report["rejected"]:
        assert rej["reason"].startswith("pieces<")
    _ok(f"physionet2017-smoke ({len(report['accepted'])} accepted)")
