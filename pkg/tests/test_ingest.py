import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beatfield.errors import MalformedInputError, StructuralError
from beatfield.ingest import (
    AlarmLabel,
    Recording,
    RhythmLabel,
    load_recording,
    parse_label,
    save_recording,
    select_lead,
)


def write_recording(tmp_path, name, rows, rate=250.0, leads="II,V", label=None):
    csv = tmp_path / f"{name}.csv"
    csv.write_text("\n".join(",".join(str(v) for v in r) for r in rows) + "\n")
    hdr = [f"sample_rate={rate}", f"leads={leads}"]
    if label:
        hdr.append(f"label={label}")
    (tmp_path / f"{name}.hdr").write_text("\n".join(hdr) + "\n")
    return csv


def test_load_two_lead_csv(tmp_path):
    rows = [(float(i), float(-i)) for i in range(10)]
    path = write_recording(tmp_path, "a", rows)
    rec = load_recording(path)
    assert rec.n_samples == 10
    assert rec.sample_rate == 250.0
    assert rec.lead_names == ("II", "V")
    assert np.array_equal(rec.lead("II"), np.arange(10, dtype=float))


def test_unequal_column_counts_is_structural_error(tmp_path):
    csv = tmp_path / "b.csv"
    csv.write_text("1,2\n3\n")
    (tmp_path / "b.hdr").write_text("sample_rate=250\nleads=II,V\n")
    with pytest.raises(StructuralError):
        load_recording(csv)


def test_bad_number_names_line(tmp_path):
    csv = tmp_path / "c.csv"
    csv.write_text("1,2\nx,4\n")
    (tmp_path / "c.hdr").write_text("sample_rate=250\nleads=II,V\n")
    with pytest.raises(MalformedInputError, match=":2"):
        load_recording(csv)


def test_exporter_round_trip_single_lead_afib(tmp_path):
    rec = Recording(
        id="r1",
        sample_rate=300.0,
        leads=(("II", np.linspace(-1, 1, 50)),),
        label=RhythmLabel("AFib"),
    )
    save_recording(rec, tmp_path / "r1")
    back = load_recording(tmp_path / "r1.csv")
    assert back.lead_names == ("II",)
    assert back.label == RhythmLabel("AFib")
    assert back.sample_rate == 300.0
    assert np.array_equal(back.lead("II"), rec.lead("II"))


def test_plain_csv_format(tmp_path):
    csv = tmp_path / "d.csv"
    csv.write_text("1.0\n2.0\n3.0\n")
    rec = load_recording(csv, format="csv", sample_rate=100.0)
    assert rec.lead_names == ("ch1",)
    assert rec.sample_rate == 100.0
    assert rec.label is None


def test_missing_header_is_error(tmp_path):
    csv = tmp_path / "e.csv"
    csv.write_text("1\n")
    with pytest.raises(MalformedInputError):
        load_recording(csv)


def test_lead_count_mismatch(tmp_path):
    csv = tmp_path / "f.csv"
    csv.write_text("1,2,3\n")
    (tmp_path / "f.hdr").write_text("sample_rate=250\nleads=II,V\n")
    with pytest.raises(StructuralError):
        load_recording(csv)


def _rec(names):
    leads = tuple((n, np.zeros(4)) for n in names)
    return Recording(id="x", sample_rate=250.0, leads=leads)


def test_select_lead_priority():
    assert select_lead(_rec(["II", "V"])).chosen_lead == "II"
    assert select_lead(_rec(["II", "V"])).fallback_rank == 0
    sel = select_lead(_rec(["I", "V"]))
    assert (sel.chosen_lead, sel.fallback_rank) == ("I", 1)
    sel = select_lead(_rec(["III"]))
    assert (sel.chosen_lead, sel.fallback_rank) == ("III", 4)
    sel = select_lead(_rec(["MCL", "aVF"]))
    assert (sel.chosen_lead, sel.fallback_rank) == ("aVF", 2)


def test_select_lead_idempotent():
    rec = _rec(["V", "I"])
    assert select_lead(rec) == select_lead(rec)


@given(st.permutations(["II", "I", "aVF", "V", "MCL"]))
def test_select_lead_permutation_invariant(names):
    # ranks 0-3 do not depend on file order
    assert select_lead(_rec(names)).chosen_lead == "II"


@given(st.permutations(["aVF", "V", "MCL", "III"]))
def test_select_lead_permutation_invariant_rank2(names):
    assert select_lead(_rec(names)).chosen_lead == "aVF"


def test_parse_label_forms():
    assert parse_label("VT:true") == AlarmLabel("VT", True)
    assert parse_label("ASY:false") == AlarmLabel("ASY", False)
    assert parse_label("Normal") == RhythmLabel("Normal")
    with pytest.raises(MalformedInputError):
        parse_label("XX:true")
    with pytest.raises(MalformedInputError):
        parse_label("NotALabel")
