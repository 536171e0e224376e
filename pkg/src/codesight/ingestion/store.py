"""Snapshot persistence: one JSON document, schema_version 1, atomic writes."""

from __future__ import annotations

import json
import os
from pathlib import Path

from .models import FetchSnapshot, snapshot_from_dict, snapshot_to_dict

SNAPSHOT_SCHEMA_VERSION = 1


class SnapshotFormatError(ValueError):
    """Snapshot file unreadable, truncated, or at an unsupported schema version."""


def write_json_atomic(path: Path, payload: object) -> None:
    """Serialize payload to path via temp-file + rename so readers never see partial files."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def save_snapshot(snapshot: FetchSnapshot, path: Path | str) -> Path:
    path = Path(path)
    write_json_atomic(path, snapshot_to_dict(snapshot))
    return path


def load_snapshot(path: Path | str) -> FetchSnapshot:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SnapshotFormatError(f"unreadable snapshot {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise SnapshotFormatError(f"snapshot {path}: top level must be an object")
    version = obj.get("schema_version")
    if version != SNAPSHOT_SCHEMA_VERSION:
        raise SnapshotFormatError(
            f"snapshot {path}: schema_version {version!r}, expected {SNAPSHOT_SCHEMA_VERSION}"
        )
    return snapshot_from_dict(obj)
