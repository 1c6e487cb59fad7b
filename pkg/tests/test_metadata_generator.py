import hashlib
import json

import pytest

from processors.metadata_generator import MetadataGenerator, RunManifest


@pytest.fixture
def metadata_generator():
    return MetadataGenerator()


def test_file_hash(metadata_generator, tmp_path):
    file_path = tmp_path / "data.csv"
    file_path.write_bytes(b"date,OT\n2016-07-01 00:00:00,1.0\n")
    assert metadata_generator.file_hash(file_path) == hashlib.sha256(file_path.read_bytes()).hexdigest()


def test_generate_manifest(metadata_generator, ett_like_csv):
    manifest = metadata_generator.generate_manifest(
        command="baseline",
        config={"L": 24},
        dataset_path=ett_like_csv,
        seed=7,
        outputs=["runs/baseline/baseline.csv"],
        duration_seconds=0.25,
    )
    assert manifest.command == "baseline"
    assert manifest.dataset_path == str(ett_like_csv)
    assert manifest.dataset_sha256 == metadata_generator.file_hash(ett_like_csv)
    assert manifest.outputs == ["runs/baseline/baseline.csv"]
    assert manifest.creator == "cdfm"


def test_generate_manifest_without_dataset(metadata_generator):
    manifest = metadata_generator.generate_manifest(command="demo-oversmoothing", seed=1)
    assert manifest.dataset_path is None
    assert manifest.dataset_sha256 is None
    assert manifest.config == {}


def test_unreadable_dataset_is_logged(metadata_generator, tmp_path, caplog):
    manifest = metadata_generator.generate_manifest(command="train", dataset_path=tmp_path / "missing.csv")
    assert manifest.dataset_sha256 is None
    assert "Error hashing dataset" in caplog.text


def test_write_manifest(metadata_generator, tmp_path):
    manifest = RunManifest(command="train", config={"alpha": 0.7}, seed=3)
    path = metadata_generator.write_manifest(manifest, tmp_path / "run")
    assert path.name == "manifest.json"
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["command"] == "train"
    assert data["config"] == {"alpha": 0.7}
    assert list(data) == sorted(data)
