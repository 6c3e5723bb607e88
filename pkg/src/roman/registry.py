"""Durable object registry: one JSON file per tagged object.

Records live under a root directory as <tag_id>.json.  Writes go through a
temp file in the same directory followed by an atomic rename, so a reader
never observes a torn record and an interrupted write leaves the previous
version intact.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .errors import ValidationError
from .profile import MotionProfile, profile_from_json, profile_to_json

_TAG_RE = re.compile(r"^[0-9a-f]{8}$")


def normalize_tag(tag_id: str) -> str:
    """Lowercase and validate an 8-hex-digit tag id."""
    if not isinstance(tag_id, str):
        raise ValidationError(f"tag_id must be a string, got {type(tag_id).__name__}")
    tag = tag_id.lower()
    if not _TAG_RE.match(tag):
        raise ValidationError(f"tag_id must be 8 hex digits, got {tag_id!r}")
    return tag


@dataclass(frozen=True)
class ObjectRecord:
    tag_id: str
    object_name: str
    category: str
    profile: MotionProfile
    updated_at: datetime | None = None  # stamped by the registry on put

    def __post_init__(self) -> None:
        object.__setattr__(self, "tag_id", normalize_tag(self.tag_id))


class Registry:
    """File-backed store of ObjectRecords keyed by tag id."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    def _path(self, tag: str) -> Path:
        return self.root / f"{tag}.json"

    def put_record(self, record: ObjectRecord) -> ObjectRecord:
        """Store (replacing any previous version) and return the stamped record."""
        with self._write_lock:
            previous = self.get_record(record.tag_id)
            now = datetime.now(timezone.utc)
            if previous is not None and previous.updated_at is not None and now <= previous.updated_at:
                # Clock went backwards or two puts landed in one tick; keep
                # updated_at strictly increasing anyway.
                now = previous.updated_at + timedelta(microseconds=1)
            stamped = replace(record, updated_at=now)
            doc = {
                "tag_id": stamped.tag_id,
                "object_name": stamped.object_name,
                "category": stamped.category,
                "updated_at": stamped.updated_at.isoformat(),
                "profile": profile_to_json(stamped.profile),
            }
            payload = json.dumps(doc, indent=2).encode()
            fd, tmp_name = tempfile.mkstemp(dir=self.root, prefix=".put-", suffix=".tmp")
            try:
                with os.fdopen(fd, "wb") as handle:
                    handle.write(payload)
                    handle.flush()
                    os.fsync(handle.fileno())
                os.replace(tmp_name, self._path(stamped.tag_id))
            except BaseException:
                try:
                    os.unlink(tmp_name)
                except OSError:
                    pass
                raise
            return stamped

    def get_record(self, tag_id: str) -> ObjectRecord | None:
        try:
            tag = normalize_tag(tag_id)
        except ValidationError:
            return None
        path = self._path(tag)
        try:
            doc = json.loads(path.read_text())
        except FileNotFoundError:
            return None
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"registry file {path} is unreadable: {exc}") from exc
        return _record_from_json(doc)

    def list_records(self) -> list[ObjectRecord]:
        """All records, sorted by object name (tag id breaks ties)."""
        records = []
        for path in self.root.glob("*.json"):
            if not _TAG_RE.match(path.stem):
                continue
            record = self.get_record(path.stem)
            if record is not None:
                records.append(record)
        records.sort(key=lambda r: (r.object_name, r.tag_id))
        return records


def _record_from_json(doc: object) -> ObjectRecord:
    if not isinstance(doc, dict):
        raise ValidationError(f"record must be an object, got {type(doc).__name__}")
    for field in ("tag_id", "object_name", "category", "updated_at", "profile"):
        if field not in doc:
            raise ValidationError(f"record is missing field {field!r}")
    try:
        updated_at = datetime.fromisoformat(doc["updated_at"])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"record updated_at is invalid: {doc['updated_at']!r}") from exc
    return ObjectRecord(
        tag_id=doc["tag_id"],
        object_name=str(doc["object_name"]),
        category=str(doc["category"]),
        profile=profile_from_json(doc["profile"]),
        updated_at=updated_at,
    )
