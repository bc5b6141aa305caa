import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beatfield.errors import DataError, ParameterError
from beatfield.evalprep import (
    AFIB2017_ADDITIONS,
    AugmentPolicy,
    ConfusionCounts,
    DatasetEntry,
    augment_replicate,
    confusion_table,
    kfold_split,
    per_class_rates,
    score_2015,
    score_2017,
    zscore_columns,
)
from beatfield.ingest import AlarmLabel, RhythmLabel


# ---------------------------------------------------------------------------
# z-scoring


def test_zscore_closed_form():
    groups = {"g": np.array([[2.0], [4.0], [6.0]])}
    normalized, model = zscore_columns(groups)
    assert np.allclose(normalized["g"][:, 0], [-1.2247448, 0.0, 1.2247448], atol=1e-6)


def test_zscore_constant_column_left_centered():
    groups = {"g": np.array([[1.0, 5.0], [1.0, 7.0], [1.0, 9.0]])}
    normalized, model = zscore_columns(groups)
    assert np.all(normalized["g"][:, 0] == 0.0)
    assert model.zero_std_columns["g"] == 1


def test_zscore_reapplication_bit_exact(rng):
    data = rng.normal(size=(20, 7))
    normalized, model = zscore_columns({"g": data})
    again = model.transform("g", data)
    assert np.array_equal(normalized["g"], again)


def test_zscore_needs_two_rows():
    with pytest.raises(ParameterError):
        zscore_columns({"g": np.ones((1, 3))})


def test_zscore_unknown_group():
    _, model = zscore_columns({"g": np.zeros((2, 2))})
    with pytest.raises(DataError):
        model.transform("other", np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# augmentation


def _rhythm_dataset(counts: dict[str, int]) -> list[DatasetEntry]:
    out = []
    for cls, n in counts.items():
        for i in range(n):
            uid = f"{cls}{i}"
            out.append(DatasetEntry(uid=uid, source_id=uid, label=RhythmLabel(cls)))
    return out


def _alarm_dataset(per_type: dict[str, tuple[int, int]]) -> list[DatasetEntry]:
    out = []
    for typ, (false_n, true_n) in per_type.items():
        for i in range(false_n):
            uid = f"{typ}f{i}"
            out.append(DatasetEntry(uid=uid, source_id=uid, label=AlarmLabel(typ, False)))
        for i in range(true_n):
            uid = f"{typ}t{i}"
            out.append(DatasetEntry(uid=uid, source_id=uid, label=AlarmLabel(typ, True)))
    return out


DATASET_2017_COUNTS = {"Normal": 5050, "AFib": 738, "Other": 2456, "Noise": 284}


def test_afib2017_augmentation_counts():
    data = _rhythm_dataset(DATASET_2017_COUNTS)
    out = augment_replicate(data, AugmentPolicy("afib2017"), np.random.default_rng(0))
    counts = {cls: sum(1 for e in out if e.class_key == cls) for cls in DATASET_2017_COUNTS}
    assert counts == {"Normal": 8050, "AFib": 4738, "Other": 7456, "Noise": 3284}
    assert sum(1 for e in out if e.replica) == sum(AFIB2017_ADDITIONS.values())


def test_alarm2015_binary_policy():
    data = _alarm_dataset({"VT": (456, 294)})
    out = augment_replicate(
        data, AugmentPolicy("alarm2015", per_type=False), np.random.default_rng(0)
    )
    counts = {cls: sum(1 for e in out if e.class_key == cls) for cls in ("false", "true")}
    assert counts == {"false": 912, "true": 912}


def test_alarm2015_per_type_policy():
    data = _alarm_dataset({"ASY": (100, 22), "VF": (52, 6)})
    out = augment_replicate(data, AugmentPolicy("alarm2015"), np.random.default_rng(0))
    for typ, target in (("ASY", 200), ("VF", 104)):
        for cls in ("false", "true"):
            n = sum(
                1
                for e in out
                if isinstance(e.label, AlarmLabel)
                and e.label.arrhythmia == typ
                and e.class_key == cls
            )
            assert n == target, (typ, cls)


def test_augmentation_deterministic_under_seed():
    data = _rhythm_dataset({"Normal": 30, "AFib": 10, "Other": 20, "Noise": 5})
    policy = AugmentPolicy("afib2017", additions={"Normal": 5, "AFib": 7, "Other": 0, "Noise": 3})
    a = augment_replicate(data, policy, np.random.default_rng(42))
    b = augment_replicate(data, policy, np.random.default_rng(42))
    assert [e.uid for e in a] == [e.uid for e in b]
    assert [e.source_id for e in a] == [e.source_id for e in b]


def test_augmentation_empty_class_errors():
    data = _rhythm_dataset({"Normal": 5, "AFib": 0, "Other": 5, "Noise": 5})
    with pytest.raises(DataError):
        augment_replicate(data, AugmentPolicy("afib2017"), np.random.default_rng(0))


def test_augmentation_preserves_distinct_recordings():
    data = _rhythm_dataset({"Normal": 8, "AFib": 6, "Other": 7, "Noise": 5})
    out = augment_replicate(
        data,
        AugmentPolicy("afib2017", additions={"Normal": 9, "AFib": 9, "Other": 9, "Noise": 9}),
        np.random.default_rng(3),
    )
    assert {e.source_id for e in out} == {e.source_id for e in data}


# ---------------------------------------------------------------------------
# folds


def test_exact_stratification():
    data = _rhythm_dataset({"Normal": 5, "AFib": 5})
    plan = kfold_split(data, k=5, seed=0)
    per_fold = {f: [] for f in range(5)}
    for e in data:
        per_fold[plan.fold_of(e)].append(e.class_key)
    for members in per_fold.values():
        assert sorted(members) == ["AFib", "Normal"]


def test_folds_partition_dataset():
    data = _rhythm_dataset({"Normal": 13, "AFib": 9, "Other": 7, "Noise": 6})
    plan = kfold_split(data, k=5, seed=1)
    assert set(plan.assignments) == {e.source_id for e in data}
    assert set(plan.assignments.values()) <= set(range(5))


@pytest.mark.parametrize("seed", range(10))
def test_replicas_colocated(seed):
    data = _rhythm_dataset({"Normal": 10, "AFib": 8, "Other": 9, "Noise": 7})
    rng = np.random.default_rng(seed)
    out = augment_replicate(
        data,
        AugmentPolicy("afib2017", additions={"Normal": 11, "AFib": 12, "Other": 13, "Noise": 14}),
        rng,
    )
    plan = kfold_split(out, k=4, seed=seed)
    fold_by_source = {}
    for e in out:
        f = plan.fold_of(e)
        assert fold_by_source.setdefault(e.source_id, f) == f


def test_k_too_large():
    data = _rhythm_dataset({"Normal": 3})
    with pytest.raises(ParameterError):
        kfold_split(data, k=5, seed=0)


def test_fold_plan_round_trips_through_json():
    import json

    data = _rhythm_dataset({"Normal": 6, "AFib": 6})
    plan = kfold_split(data, k=3, seed=9)
    from beatfield.evalprep import FoldPlan

    back = FoldPlan.from_dict(json.loads(json.dumps(plan.to_dict())))
    assert back == plan


# ---------------------------------------------------------------------------
# scores


def test_score_2015_examples():
    assert score_2015(ConfusionCounts(1, 1, 0, 0)) == 100.0
    assert score_2015(ConfusionCounts(9, 9, 1, 1)) == pytest.approx(75.0, abs=1e-12)
    assert score_2015(ConfusionCounts(0, 0, 0, 1)) == 0.0
    with pytest.raises(DataError):
        score_2015(ConfusionCounts(0, 0, 0, 0))


@given(
    st.integers(0, 200), st.integers(0, 200), st.integers(0, 200), st.integers(1, 200)
)
@settings(max_examples=100)
def test_score_2015_below_accuracy_when_fn_positive(tp, tn, fp, fn):
    c = ConfusionCounts(tp, tn, fp, fn)
    accuracy = 100.0 * (tp + tn) / c.total
    assert score_2015(c) <= accuracy + 1e-9
    if tp + tn > 0:
        assert score_2015(c) < accuracy


def test_score_2017_examples():
    assert score_2017(92.0, 82.0, 75.0) == pytest.approx(83.0, abs=1e-9)
    assert round(score_2017(99.42, 98.38, 98.53), 2) == pytest.approx(98.78, abs=1e-9)
    assert score_2017(100.0, 100.0, 100.0) == 100.0


def test_per_class_rates_perfect():
    table = np.diag([10, 20, 30])
    rates = per_class_rates(table, ["a", "b", "c"])
    for cls in ("a", "b", "c"):
        assert rates[cls]["tpr"] == 100.0
        assert rates[cls]["tnr"] == 100.0
        assert rates[cls]["f1"] == 100.0


def test_per_class_zero_class_flagged():
    table = np.array([[5, 0], [0, 0]])
    rates = per_class_rates(table, ["a", "b"])
    assert rates["b"]["f1"] == 0.0
    assert rates["b"]["f1_flagged_zero"] is True


def test_binary_table_rates():
    table = np.array([[98, 2], [2, 98]])
    rates = per_class_rates(table, ["pos", "neg"])
    assert rates["pos"]["tpr"] == pytest.approx(98.0)
    assert rates["pos"]["tnr"] == pytest.approx(98.0)


def test_confusion_table_roundtrip():
    actual = ["a", "a", "b", "b", "b"]
    predicted = ["a", "b", "b", "b", "a"]
    table = confusion_table(actual, predicted, ["a", "b"])
    assert table.tolist() == [[1, 1], [1, 2]]
