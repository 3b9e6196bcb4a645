"""Bit-exact interchange formats for features, manifests and score tables.

Binary feature file (all little-endian):

    magic "KFEA" (4 bytes) | u8 version=1 | u8 dtype (1 = float32) |
    u16 reserved=0 | u64 n | u64 d | n*d float32 row-major |
    u8 has_labels | if 1: n x u32 labels

A CSV fallback (`.csv` suffix) carries one sample per line under the
header ``label,f0,...,f{d-1}``; label -1 means absent.  Payloads are
float32 on disk; in-memory math is double precision after load.
"""

from __future__ import annotations

import csv
import json
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadMagic,
    DuplicateModelId,
    MissingFile,
    NonFiniteInput,
    NonFiniteValue,
    SchemaError,
    TruncatedPayload,
    UnsupportedVersion,
)
from .evaluation import ScoreTable
from .kernels import FeatureMatrix, LabelVector

MAGIC = b"KFEA"
VERSION = 1
DTYPE_FLOAT32 = 1
_HEADER = struct.Struct("<4sBBHQQ")


@dataclass
class ManifestEntry:
    model_id: str
    feature_file: str
    architecture: str
    layers: int
    source_name: str
    source_size: int


@dataclass
class ModelManifest:
    """Registry of candidate models and their precomputed feature files."""

    entries: list[ManifestEntry]
    root: str = "."

    def feature_path(self, entry: ManifestEntry) -> str:
        return os.path.join(self.root, entry.feature_file)


def _as_float32(data: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(data, dtype=np.float32)
    if not np.all(np.isfinite(out)):
        raise NonFiniteInput("feature data does not fit finite float32")
    return out


def write_features(
    path: str, features: FeatureMatrix, labels: LabelVector | None = None
) -> None:
    """Write a feature file; `.csv` suffix selects the CSV fallback."""
    if str(path).endswith(".csv"):
        _write_csv(path, features, labels)
        return
    data = _as_float32(features.data)
    n, d = data.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, DTYPE_FLOAT32, 0, n, d))
        fh.write(data.tobytes(order="C"))
        if labels is None:
            fh.write(struct.pack("<B", 0))
        else:
            if labels.n != n:
                raise SchemaError("labels and features disagree on n")
            fh.write(struct.pack("<B", 1))
            fh.write(np.ascontiguousarray(labels.labels, dtype="<u4").tobytes())


def read_features(
    path: str, provenance: str = "pretrained"
) -> tuple[FeatureMatrix, LabelVector | None]:
    """Read a feature file written by write_features.

    Never allocates more than the header declares: the remaining file size
    is checked against the declared payload before any array is built.
    """
    if str(path).endswith(".csv"):
        return _read_csv(path, provenance)
    file_size = os.path.getsize(path)
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise TruncatedPayload(f"{path}: file shorter than the fixed header")
        magic, version, dtype, _reserved, n, d = _HEADER.unpack(header)
        if magic != MAGIC:
            raise BadMagic(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise UnsupportedVersion(f"{path}: unsupported version {version}")
        if dtype != DTYPE_FLOAT32:
            raise UnsupportedVersion(f"{path}: unrecognized dtype code {dtype}")
        if n < 1 or d < 1:
            raise SchemaError(f"{path}: header declares n={n}, d={d}")
        payload_bytes = n * d * 4
        if _HEADER.size + payload_bytes + 1 > file_size:
            raise TruncatedPayload(
                f"{path}: header declares {payload_bytes} payload bytes; file too short"
            )
        raw = fh.read(payload_bytes)
        data = np.frombuffer(raw, dtype="<f4").reshape(n, d)
        if not np.all(np.isfinite(data)):
            raise NonFiniteValue(f"{path}: payload contains non-finite values")
        flag = fh.read(1)
        labels: LabelVector | None = None
        if flag[0] == 1:
            label_bytes = n * 4
            if _HEADER.size + payload_bytes + 1 + label_bytes > file_size:
                raise TruncatedPayload(f"{path}: label block truncated")
            lab = np.frombuffer(fh.read(label_bytes), dtype="<u4").astype(np.int64)
            labels = LabelVector(lab, num_classes=int(lab.max()) + 1)
        elif flag[0] != 0:
            raise SchemaError(f"{path}: has_labels flag must be 0 or 1, got {flag[0]}")
    features = FeatureMatrix(data.astype(np.float64), provenance=provenance)
    return features, labels


def _write_csv(path: str, features: FeatureMatrix, labels: LabelVector | None) -> None:
    data = _as_float32(features.data)
    n, d = data.shape
    if labels is not None and labels.n != n:
        raise SchemaError("labels and features disagree on n")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", *[f"f{j}" for j in range(d)]])
        for i in range(n):
            lab = int(labels.labels[i]) if labels is not None else -1
            # %.9g round-trips any float32 exactly
            writer.writerow([lab, *[format(float(v), ".9g") for v in data[i]]])


def _read_csv(path: str, provenance: str) -> tuple[FeatureMatrix, LabelVector | None]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TruncatedPayload(f"{path}: empty CSV") from None
        if not header or header[0] != "label":
            raise SchemaError(f"{path}: CSV header must start with 'label'")
        d = len(header) - 1
        if d < 1:
            raise SchemaError(f"{path}: CSV declares no feature columns")
        rows: list[list[str]] = []
        for row in reader:
            if not row:
                continue
            if len(row) != d + 1:
                raise TruncatedPayload(f"{path}: row has {len(row)} fields, expected {d + 1}")
            rows.append(row)
    if not rows:
        raise TruncatedPayload(f"{path}: CSV has a header but no samples")
    labels_raw = np.array([int(r[0]) for r in rows], dtype=np.int64)
    data = np.array([[np.float32(v) for v in r[1:]] for r in rows], dtype=np.float32)
    if not np.all(np.isfinite(data)):
        raise NonFiniteValue(f"{path}: payload contains non-finite values")
    features = FeatureMatrix(data.astype(np.float64), provenance=provenance)
    labels: LabelVector | None = None
    if np.all(labels_raw >= 0):
        labels = LabelVector(labels_raw, num_classes=int(labels_raw.max()) + 1)
    elif np.any(labels_raw >= 0):
        raise SchemaError(f"{path}: labels must be all present or all -1")
    return features, labels


def load_manifest(path: str) -> ModelManifest:
    """Load and validate a JSON model manifest."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    models = doc.get("models")
    if not isinstance(models, list) or not models:
        raise SchemaError(f"{path}: manifest needs a non-empty 'models' list")
    root = os.path.dirname(os.path.abspath(path))
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    for item in models:
        try:
            entry = ManifestEntry(
                model_id=str(item["model_id"]),
                feature_file=str(item["feature_file"]),
                architecture=str(item.get("architecture", "unknown")),
                layers=int(item["layers"]),
                source_name=str(item.get("source_name", "unknown")),
                source_size=int(item["source_size"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: bad manifest entry {item!r} ({exc})") from None
        if entry.model_id in seen:
            raise DuplicateModelId(f"{path}: duplicate model_id {entry.model_id!r}")
        seen.add(entry.model_id)
        full = os.path.join(root, entry.feature_file)
        if not os.path.exists(full):
            raise MissingFile(f"{path}: feature file {full} does not exist")
        entries.append(entry)
    return ModelManifest(entries=entries, root=root)


def load_score_table(path: str) -> ScoreTable:
    """Load a ground-truth CSV: model_id, target_id, accuracy.

    The accuracy column name declares the unit: ``accuracy`` (fraction,
    default) or ``accuracy_percent``.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty ground-truth CSV") from None
        header = [h.strip() for h in header]
        if header[:2] != ["model_id", "target_id"] or len(header) != 3:
            raise SchemaError(
                f"{path}: expected header model_id,target_id,accuracy[_percent], got {header}"
            )
        if header[2] == "accuracy" or header[2] == "accuracy_fraction":
            unit = "fraction"
        elif header[2] == "accuracy_percent":
            unit = "percent"
        else:
            raise SchemaError(f"{path}: unknown accuracy column {header[2]!r}")
        table = ScoreTable(accuracy_unit=unit)
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise SchemaError(f"{path}: row has {len(row)} fields, expected 3")
            table.add_truth(row[0].strip(), row[1].strip(), float(row[2]))
    if not table.truth:
        raise SchemaError(f"{path}: ground-truth CSV has no rows")
    return table
