"""Binary and CSV feature files, manifests, ground-truth tables."""

import json

import numpy as np
import pytest

from kitescore.errors import (
    BadMagic,
    DuplicateModelId,
    MissingFile,
    NonFiniteValue,
    SchemaError,
    TruncatedPayload,
    UnsupportedVersion,
)
from kitescore.io_formats import load_manifest, load_score_table, read_features, write_features
from kitescore.kernels import FeatureMatrix, LabelVector

# header(24) + one float32 + has_labels + one u32 label = 33 bytes
GOLDEN_HEX = (
    "4b464541"  # magic "KFEA"
    "01"        # version 1
    "01"        # dtype float32
    "0000"      # reserved
    "0100000000000000"  # n = 1
    "0100000000000000"  # d = 1
    "00002040"  # float32 2.5 little-endian
    "01"        # has_labels
    "03000000"  # label 3
)


def test_golden_minimal_file(tmp_path):
    path = tmp_path / "one.kfea"
    write_features(
        str(path),
        FeatureMatrix(np.array([[2.5]]), "pretrained"),
        LabelVector(np.array([3]), 4),
    )
    blob = path.read_bytes()
    assert len(blob) == 33
    assert blob.hex() == GOLDEN_HEX


def test_roundtrip_bit_exact(tmp_path, rng):
    path = tmp_path / "f.kfea"
    for trial in range(50):
        n, d = int(rng.integers(1, 40)), int(rng.integers(1, 20))
        data = rng.standard_normal((n, d)).astype(np.float32)
        if trial % 7 == 0:
            data[0, 0] = -0.0  # signed zero must survive
        labels = None
        if trial % 2 == 0:
            raw = rng.integers(0, 5, n)
            raw[0] = 4  # make num_classes reconstruction exact
            labels = LabelVector(raw, 5)
        write_features(str(path), FeatureMatrix(data.astype(np.float64), "pretrained"), labels)
        feats, got_labels = read_features(str(path))
        assert np.array_equal(
            feats.data.astype(np.float32).view(np.uint32),
            data.view(np.uint32),
        )
        if labels is None:
            assert got_labels is None
        else:
            assert np.array_equal(got_labels.labels, labels.labels)
            assert got_labels.num_classes == labels.num_classes


def test_truncated_payload(tmp_path, rng):
    path = tmp_path / "t.kfea"
    write_features(str(path), FeatureMatrix(rng.standard_normal((4, 3)), "pretrained"))
    blob = path.read_bytes()
    for cut in (10, 30, len(blob) - 1):
        path.write_bytes(blob[:cut])
        with pytest.raises(TruncatedPayload):
            read_features(str(path))


def test_bad_magic(tmp_path, rng):
    path = tmp_path / "b.kfea"
    write_features(str(path), FeatureMatrix(rng.standard_normal((2, 2)), "pretrained"))
    blob = bytearray(path.read_bytes())
    blob[:4] = b"XXXX"
    path.write_bytes(bytes(blob))
    with pytest.raises(BadMagic):
        read_features(str(path))


def test_unsupported_version_and_dtype(tmp_path, rng):
    path = tmp_path / "v.kfea"
    write_features(str(path), FeatureMatrix(rng.standard_normal((2, 2)), "pretrained"))
    blob = bytearray(path.read_bytes())
    blob[4] = 9
    path.write_bytes(bytes(blob))
    with pytest.raises(UnsupportedVersion):
        read_features(str(path))
    blob[4] = 1
    blob[5] = 7
    path.write_bytes(bytes(blob))
    with pytest.raises(UnsupportedVersion):
        read_features(str(path))


def test_non_finite_payload_rejected(tmp_path):
    path = tmp_path / "n.kfea"
    write_features(str(path), FeatureMatrix(np.array([[1.0, 2.0]]), "pretrained"))
    blob = bytearray(path.read_bytes())
    blob[24:28] = np.array([np.inf], dtype="<f4").tobytes()
    path.write_bytes(bytes(blob))
    with pytest.raises(NonFiniteValue):
        read_features(str(path))


def test_reader_guards_absurd_header_sizes(tmp_path, rng):
    path = tmp_path / "g.kfea"
    write_features(str(path), FeatureMatrix(rng.standard_normal((2, 2)), "pretrained"))
    blob = bytearray(path.read_bytes())
    blob[8:16] = (10**15).to_bytes(8, "little")  # n absurdly large
    path.write_bytes(bytes(blob))
    with pytest.raises(TruncatedPayload):
        read_features(str(path))


def test_csv_roundtrip(tmp_path, rng):
    path = tmp_path / "f.csv"
    data = rng.standard_normal((7, 3)).astype(np.float32)
    labels = LabelVector(np.array([0, 1, 2, 0, 1, 2, 2]), 3)
    write_features(str(path), FeatureMatrix(data.astype(np.float64), "pretrained"), labels)
    text = path.read_text().splitlines()
    assert text[0] == "label,f0,f1,f2"
    feats, got = read_features(str(path))
    assert np.array_equal(feats.data.astype(np.float32), data)
    assert np.array_equal(got.labels, labels.labels)


def test_csv_without_labels_uses_minus_one(tmp_path, rng):
    path = tmp_path / "f.csv"
    write_features(str(path), FeatureMatrix(rng.standard_normal((3, 2)), "pretrained"))
    lines = path.read_text().splitlines()
    assert all(line.startswith("-1,") for line in lines[1:])
    feats, got = read_features(str(path))
    assert got is None
    assert feats.n == 3


# -------------------------------------------------------------- manifests


def _write_manifest(tmp_path, models):
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"models": models}))
    return str(path)


def _one_feature_file(tmp_path, rng, name="m0.kfea"):
    path = tmp_path / name
    write_features(str(path), FeatureMatrix(rng.standard_normal((4, 2)), "pretrained"))
    return name


def test_manifest_roundtrip(tmp_path, rng):
    fname = _one_feature_file(tmp_path, rng)
    path = _write_manifest(
        tmp_path,
        [
            {
                "model_id": "m0",
                "feature_file": fname,
                "architecture": "resnet18",
                "layers": 18,
                "source_name": "set-a",
                "source_size": 10000,
            }
        ],
    )
    manifest = load_manifest(path)
    assert len(manifest.entries) == 1
    entry = manifest.entries[0]
    assert (entry.model_id, entry.layers, entry.source_size) == ("m0", 18, 10000)
    assert entry.architecture == "resnet18"


def test_manifest_duplicate_id(tmp_path, rng):
    fname = _one_feature_file(tmp_path, rng)
    row = {"model_id": "m0", "feature_file": fname, "layers": 18, "source_size": 1}
    with pytest.raises(DuplicateModelId):
        load_manifest(_write_manifest(tmp_path, [row, dict(row)]))


def test_manifest_empty_list(tmp_path):
    with pytest.raises(SchemaError):
        load_manifest(_write_manifest(tmp_path, []))


def test_manifest_missing_file(tmp_path):
    row = {"model_id": "m0", "feature_file": "absent.kfea", "layers": 18, "source_size": 1}
    with pytest.raises(MissingFile):
        load_manifest(_write_manifest(tmp_path, [row]))


# ------------------------------------------------------------ score table


def test_score_table_load(tmp_path):
    path = tmp_path / "truth.csv"
    path.write_text("model_id,target_id,accuracy\nm0,t,0.5\nm1,t,0.75\n")
    table = load_score_table(str(path))
    assert table.accuracy_unit == "fraction"
    assert table.truth[("m1", "t")] == 0.75


def test_score_table_percent_unit(tmp_path):
    path = tmp_path / "truth.csv"
    path.write_text("model_id,target_id,accuracy_percent\nm0,t,50\n")
    assert load_score_table(str(path)).accuracy_unit == "percent"


def test_score_table_duplicate_pair(tmp_path):
    path = tmp_path / "truth.csv"
    path.write_text("model_id,target_id,accuracy\nm0,t,0.5\nm0,t,0.6\n")
    with pytest.raises(SchemaError):
        load_score_table(str(path))


def test_score_table_bad_header(tmp_path):
    path = tmp_path / "truth.csv"
    path.write_text("model,target,acc\nm0,t,0.5\n")
    with pytest.raises(SchemaError):
        load_score_table(str(path))
