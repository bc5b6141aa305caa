"""Sequence-matrix file formats and the schema manifest.

Binary layout (little-endian throughout):

    bytes 0-3   magic ``BFSM``
    bytes 4-7   format version (u32)
    bytes 8-11  header length in bytes (u32)
    header      UTF-8 JSON: recording_id, label, scenario, manifest,
                n_rows, n_cols
    data        n_cols * n_rows float64 values, column-major

The CSV fallback writes a header row of column names plus a ``.meta.json``
sidecar carrying the same header fields.  The manifest JSON is the single
source of truth for column order; consumers must never assume it.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import MalformedInputError, StructuralError
from .level1 import SCHEMA
from .matching import LEVEL2_FUNCTIONS, SequenceMatrix, column_names

MAGIC = b"BFSM"
FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"


def manifest_dict() -> dict:
    return {
        "version": FORMAT_VERSION,
        "level1": [
            {"name": f.name, "group": f.group, "starred": f.starred, "index": f.index}
            for f in SCHEMA
        ],
        "level2_functions": list(LEVEL2_FUNCTIONS),
        "columns": list(column_names()),
    }


def write_manifest(directory: str | Path) -> Path:
    path = Path(directory) / MANIFEST_NAME
    path.write_text(json.dumps(manifest_dict(), indent=1, sort_keys=True), encoding="utf-8")
    return path


def load_manifest(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        m = json.load(fh)
    for key in ("level1", "level2_functions", "columns"):
        if key not in m:
            raise MalformedInputError(f"{path}: manifest missing {key!r}")
    return m


def _header_dict(sm: SequenceMatrix, manifest: str) -> dict:
    return {
        "recording_id": sm.recording_id,
        "label": sm.label,
        "scenario": sm.scenario,
        "manifest": manifest,
        "n_rows": int(sm.values.shape[0]),
        "n_cols": int(sm.values.shape[1]),
    }


def save_matrix_binary(sm: SequenceMatrix, path: str | Path, manifest: str = MANIFEST_NAME) -> None:
    header = json.dumps(_header_dict(sm, manifest), sort_keys=True).encode("utf-8")
    data = np.asarray(sm.values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(data.T.tobytes(order="C"))  # column-major on disk


def load_matrix_binary(path: str | Path, columns: tuple[str, ...] | None = None) -> SequenceMatrix:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != MAGIC:
        raise MalformedInputError(f"{path}: bad magic {raw[:4]!r}")
    version, header_len = struct.unpack("<II", raw[4:12])
    if version != FORMAT_VERSION:
        raise MalformedInputError(f"{path}: unsupported version {version}")
    header = json.loads(raw[12 : 12 + header_len].decode("utf-8"))
    n_rows, n_cols = header["n_rows"], header["n_cols"]
    body = raw[12 + header_len :]
    expected = n_rows * n_cols * 8
    if len(body) != expected:
        raise StructuralError(f"{path}: expected {expected} data bytes, found {len(body)}")
    data = np.frombuffer(body, dtype="<f8").reshape(n_cols, n_rows).T.copy()
    cols = columns if columns is not None else column_names()
    if len(cols) != n_cols:
        raise StructuralError(f"{path}: {n_cols} columns on disk but {len(cols)} expected")
    return SequenceMatrix(
        values=data,
        columns=tuple(cols),
        recording_id=header["recording_id"],
        label=header["label"],
        scenario=header["scenario"],
    )


def save_matrix_csv(sm: SequenceMatrix, path: str | Path, manifest: str = MANIFEST_NAME) -> None:
    path = Path(path)
    lines = [",".join(sm.columns)]
    for row in sm.values:
        lines.append(",".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    meta = path.with_suffix(".meta.json")
    meta.write_text(
        json.dumps(_header_dict(sm, manifest), indent=1, sort_keys=True), encoding="utf-8"
    )


def load_matrix_csv(path: str | Path) -> SequenceMatrix:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise MalformedInputError(f"{path}: empty file")
    cols = tuple(lines[0].split(","))
    rows = [
        np.array([float(c) for c in line.split(",")]) for line in lines[1:] if line.strip()
    ]
    data = np.vstack(rows) if rows else np.empty((0, len(cols)))
    meta_path = path.with_suffix(".meta.json")
    meta = json.loads(meta_path.read_text(encoding="utf-8")) if meta_path.exists() else {}
    return SequenceMatrix(
        values=data,
        columns=cols,
        recording_id=meta.get("recording_id", path.stem),
        label=meta.get("label"),
        scenario=meta.get("scenario", {}),
    )


def load_matrix(path: str | Path) -> SequenceMatrix:
    path = Path(path)
    if path.suffix == ".csv":
        return load_matrix_csv(path)
    return load_matrix_binary(path)
