"""Readers for the exported sequence-matrix files and schema manifest.

Implemented against the documented file layout, deliberately independent of
the exporter's code: binary files carry a 4-byte magic ``BFSM``, a u32
version, a u32 header length, a UTF-8 JSON header (recording_id, label,
scenario, n_rows, n_cols) and column-major little-endian float64 data.  CSV
files carry a column-name header row plus a ``.meta.json`` sidecar.

The harness never reads raw signals; these matrices and the manifest are its
entire view of the upstream pipeline.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"BFSM"
SUPPORTED_VERSION = 1


class MatrixFormatError(Exception):
    """File does not match the documented matrix format."""


class SchemaMismatchError(Exception):
    """Matrix columns do not match the schema manifest."""


@dataclass(frozen=True)
class LoadedMatrix:
    recording_id: str
    label: str | None
    values: np.ndarray
    scenario: dict


def read_manifest(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    for key in ("columns", "level1", "level2_functions"):
        if key not in manifest:
            raise MatrixFormatError(f"{path}: manifest missing {key!r}")
    return manifest


def read_matrix_binary(path: str | Path) -> LoadedMatrix:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise MatrixFormatError(f"{path}: bad magic {raw[:4]!r}")
    version, header_len = struct.unpack("<II", raw[4:12])
    if version != SUPPORTED_VERSION:
        raise MatrixFormatError(f"{path}: unsupported version {version}")
    header = json.loads(raw[12 : 12 + header_len].decode("utf-8"))
    n_rows, n_cols = header["n_rows"], header["n_cols"]
    body = raw[12 + header_len :]
    if len(body) != 8 * n_rows * n_cols:
        raise MatrixFormatError(f"{path}: truncated data section")
    values = np.frombuffer(body, dtype="<f8").reshape(n_cols, n_rows).T.astype(float)
    return LoadedMatrix(
        recording_id=header["recording_id"],
        label=header.get("label"),
        values=values,
        scenario=header.get("scenario", {}),
    )


def read_matrix_csv(path: str | Path) -> LoadedMatrix:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise MatrixFormatError(f"{path}: empty file")
    n_cols = len(lines[0].split(","))
    rows = [
        np.array([float(c) for c in line.split(",")])
        for line in lines[1:]
        if line.strip()
    ]
    values = np.vstack(rows) if rows else np.empty((0, n_cols))
    meta_path = path.with_suffix(".meta.json")
    meta = json.loads(meta_path.read_text(encoding="utf-8")) if meta_path.exists() else {}
    return LoadedMatrix(
        recording_id=meta.get("recording_id", path.stem),
        label=meta.get("label"),
        values=values,
        scenario=meta.get("scenario", {}),
    )


def read_matrix(path: str | Path) -> LoadedMatrix:
    path = Path(path)
    return read_matrix_csv(path) if path.suffix == ".csv" else read_matrix_binary(path)


def load_dataset(
    matrices_dir: str | Path, manifest_path: str | Path | None = None
) -> tuple[list[LoadedMatrix], dict]:
    """Read every matrix in a directory and validate it against the manifest.

    Raises SchemaMismatchError before any training can start when a matrix's
    column count disagrees with the manifest.
    """
    matrices_dir = Path(matrices_dir)
    manifest_path = Path(manifest_path) if manifest_path else matrices_dir / "manifest.json"
    manifest = read_manifest(manifest_path)
    n_cols = len(manifest["columns"])
    matrices = []
    paths = sorted(
        p for p in matrices_dir.iterdir() if p.suffix in (".seqmat", ".csv") and p.name != "labels.csv"
    )
    for p in paths:
        m = read_matrix(p)
        if m.values.shape[1] != n_cols:
            raise SchemaMismatchError(
                f"{p}: {m.values.shape[1]} columns, manifest says {n_cols}"
            )
        matrices.append(m)
    return matrices, manifest
