"""
Tables and manifests

CSV files are written through pandas with 17 significant digits so that
repeated runs are byte-identical; manifests are canonical JSON.
"""
import hashlib
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import pandas as pd

FLOAT_FORMAT = "%.17g"


def write_table(rows: Iterable[Mapping], path: Path, columns: Sequence[str] = None) -> Path:
    """Writes dictionaries as one CSV row each"""
    frame = pd.DataFrame(list(rows), columns=columns)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_table(path: Path) -> pd.DataFrame:
    """Reads a table written by write_table"""
    return pd.read_csv(path)


def canonical_json_bytes(obj) -> bytes:
    """Sorted keys and compact separators"""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode("utf-8")


def sha256_bytes(payload: bytes) -> str:
    """Hex digest of a byte string"""
    return hashlib.sha256(payload).hexdigest()


def sha256_file(path: Path) -> str:
    """Hex digest of a file, read in 1 MiB chunks"""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(path: Path, serialized_config: dict, artifacts: Sequence[Path], version: str) -> Path:
    """manifest.json with the config, its hash and the hash of every artifact"""
    path = Path(path)
    manifest = {
        "version": version,
        "config": serialized_config,
        "config_sha256": sha256_bytes(canonical_json_bytes(serialized_config)),
        "artifacts": {Path(item).name: sha256_file(item) for item in sorted(artifacts)},
    }
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path
