"""Fixture matrices written with an independent struct-level writer."""

import json
import struct
from pathlib import Path

import numpy as np
import pytest

N_FEATURES = 12


def write_matrix_file(path: Path, rid: str, label: str, values: np.ndarray) -> None:
    header = json.dumps(
        {
            "recording_id": rid,
            "label": label,
            "scenario": {"kind": "offline", "rf_length": None, "threshold": None, "warmup": None},
            "manifest": "manifest.json",
            "n_rows": int(values.shape[0]),
            "n_cols": int(values.shape[1]),
        },
        sort_keys=True,
    ).encode("utf-8")
    data = np.asarray(values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(b"BFSM")
        fh.write(struct.pack("<I", 1))
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(data.T.tobytes(order="C"))


def write_fixture_manifest(directory: Path, n_features: int = N_FEATURES) -> Path:
    names = [f"feat_{i}" for i in range(n_features)]
    manifest = {
        "version": 1,
        "level1": [
            {"name": n, "group": "statistical", "starred": False, "index": i}
            for i, n in enumerate(names)
        ],
        "level2_functions": [],
        "columns": names,
    }
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1))
    return path


def make_fixture_dataset(
    directory: Path,
    n_per_class: int = 30,
    seed: int = 0,
    separable: bool = True,
    shuffle_labels: bool = False,
) -> list[str]:
    """Two-class dataset: feature 0 carries the class signal when separable.

    ``shuffle_labels`` permutes the assigned labels while leaving the data
    untouched, giving a null fixture with no learnable signal.
    """
    directory.mkdir(parents=True, exist_ok=True)
    write_fixture_manifest(directory)
    rng = np.random.default_rng(seed)
    entries = [
        (f"{cls.lower()}{i:03d}", cls, offset)
        for cls, offset in (("Normal", 1.0), ("AFib", -1.0))
        for i in range(n_per_class)
    ]
    labels = [cls for _, cls, _ in entries]
    if shuffle_labels:
        labels = list(rng.permutation(labels))
    for (rid, _, offset), label in zip(entries, labels):
        length = int(rng.integers(5, 13))
        values = rng.normal(0.0, 0.5, size=(length, N_FEATURES))
        if separable:
            values[:, 0] = offset + rng.normal(0.0, 0.1, size=length)
        write_matrix_file(directory / f"{rid}.seqmat", rid, label, values)
    return [rid for rid, _, _ in entries]


@pytest.fixture()
def fixture_dir(tmp_path):
    return tmp_path / "matrices"
