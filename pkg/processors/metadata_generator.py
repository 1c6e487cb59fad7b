import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from config.settings import MANIFEST_FILE

logger = logging.getLogger(__name__)

HASH_CHUNK_SIZE = 1024 * 1024


class RunManifest(BaseModel):
    """Everything needed to re-derive a command's artifacts."""

    command: str
    config: Dict[str, Any] = Field(default_factory=dict)
    dataset_path: Optional[str] = None
    dataset_sha256: Optional[str] = None
    seed: Optional[int] = None
    outputs: List[str] = Field(default_factory=list)
    duration_seconds: float = 0.0
    creator: str = "cdfm"
    version: str = "1.0"


class MetadataGenerator:
    """Generate run manifests and content hashes."""

    @staticmethod
    def file_hash(path) -> str:
        """SHA-256 of a file's bytes, read in chunks."""
        digest = hashlib.sha256()
        with open(path, "rb") as f:
            for chunk in iter(lambda: f.read(HASH_CHUNK_SIZE), b""):
                digest.update(chunk)
        return digest.hexdigest()

    def generate_manifest(
        self,
        command: str,
        config: Optional[Dict[str, Any]] = None,
        dataset_path=None,
        seed: Optional[int] = None,
        outputs: Optional[List[str]] = None,
        duration_seconds: float = 0.0,
    ) -> RunManifest:
        dataset_sha256 = None
        if dataset_path is not None:
            try:
                dataset_sha256 = self.file_hash(dataset_path)
            except OSError as e:
                logger.error(f"Error hashing dataset {dataset_path}: {e}")
        return RunManifest(
            command=command,
            config=dict(config or {}),
            dataset_path=None if dataset_path is None else str(dataset_path),
            dataset_sha256=dataset_sha256,
            seed=seed,
            outputs=list(outputs or []),
            duration_seconds=duration_seconds,
        )

    def write_manifest(self, manifest: RunManifest, out_dir) -> Path:
        path = Path(out_dir) / MANIFEST_FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(manifest.model_dump(mode="json"), f, indent=2, sort_keys=True)
            f.write("\n")
        logger.info(f"Wrote manifest {path}")
        return path
