"""Plain-directory persistence for the whole dataset.

Layout under the dataset root:

    meta.json       format version, ingest stats, integrity digests
    registry.json   JSON array of chat records
    messages.jsonl  one message per line (export schema + media_size + crc)
    clusters.jsonl  one content cluster per line (+ crc)
    blobs/xx/<checksum>   media payloads, content-addressed, two-level fan-out

Every JSONL line carries a CRC over its canonical serialization so a tampered
line is reported by number at load time. Writes go through a temp file and an
atomic rename, so readers only ever see completed snapshots. Re-snapshotting
a loaded dataset is byte-identical.
"""

from __future__ import annotations

import json
import logging
import os
import zlib
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from .cluster import IntegrityError
from .ingest import ChatRegistry, message_to_export_obj
from .models import (
    BlobRef,
    ContentCluster,
    RawMessage,
    ValidationError,
    canonical_json,
    format_utc_timestamp,
    parse_utc_timestamp,
)
from .fingerprint import checksum128

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

_META = "meta.json"
_REGISTRY = "registry.json"
_MESSAGES = "messages.jsonl"
_CLUSTERS = "clusters.jsonl"
_BLOB_DIR = "blobs"


class StorageError(Exception):
    """Base class for persistence failures."""


class BlobNotFoundError(StorageError):
    pass


class BlobCorruptError(StorageError):
    pass


class SnapshotIntegrityError(StorageError):
    pass


class MigrationError(StorageError):
    """Snapshot format version is not the one this code reads."""


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _line_crc(obj: dict) -> str:
    return f"{zlib.crc32(canonical_json(obj).encode('utf-8')):08x}"


def _dump_guarded_line(obj: dict) -> str:
    return canonical_json({**obj, "crc": _line_crc(obj)})


def _load_guarded_line(line: str, source: str, lineno: int) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SnapshotIntegrityError(f"{source} line {lineno}: not valid JSON ({exc})") from None
    if not isinstance(obj, dict) or "crc" not in obj:
        raise SnapshotIntegrityError(f"{source} line {lineno}: missing integrity field")
    expected = obj.pop("crc")
    if _line_crc(obj) != expected:
        raise SnapshotIntegrityError(f"{source} line {lineno}: integrity check failed")
    return obj


class BlobStore:
    """Content-addressed blob storage under `blobs/<first 2 hex>/<full hex>`."""

    def __init__(self, root: Path):
        self.root = Path(root)

    def path_for(self, checksum: str) -> Path:
        return self.root / checksum[:2] / checksum

    def put(self, payload: bytes, media_kind: str) -> BlobRef:
        """Store a payload; idempotent, re-putting identical bytes is a no-op."""
        checksum = checksum128(payload)
        path = self.path_for(checksum)
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            try:
                _atomic_write(path, payload)
            except OSError as exc:
                raise StorageError(f"cannot store blob {checksum}: {exc}") from exc
        return BlobRef(checksum=checksum, size_bytes=len(payload), media_kind=media_kind)

    def get(self, checksum: str) -> bytes:
        """Read a payload back; the checksum is re-verified on every read."""
        path = self.path_for(checksum)
        if not path.exists():
            raise BlobNotFoundError(f"no blob {checksum}")
        payload = path.read_bytes()
        if checksum128(payload) != checksum:
            raise BlobCorruptError(f"blob {checksum} fails its checksum")
        return payload

    def exists(self, checksum: str) -> bool:
        return self.path_for(checksum).exists()

    def count(self) -> int:
        if not self.root.exists():
            return 0
        return sum(1 for p in self.root.glob("??/*") if p.is_file())


@dataclass
class FingerprintFailure:
    """A media message whose content could not be fingerprinted."""

    chat_id: str
    msg_id: str
    reason: str

    def to_json_obj(self) -> dict:
        return {"chat_id": self.chat_id, "msg_id": self.msg_id, "reason": self.reason}


@dataclass
class Dataset:
    """In-memory tables bound to an on-disk dataset directory."""

    root: Path
    registry: ChatRegistry = field(default_factory=ChatRegistry)
    messages: dict[tuple[str, str], RawMessage] = field(default_factory=dict)
    clusters: list[ContentCluster] = field(default_factory=list)
    fingerprint_failures: list[FingerprintFailure] = field(default_factory=list)
    ingest_stats: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.root = Path(self.root)
        self.blobs = BlobStore(self.root / _BLOB_DIR)

    def clusters_by_id(self) -> dict[str, ContentCluster]:
        return {c.cluster_id: c for c in self.clusters}

    def add_message(self, message: RawMessage) -> bool:
        """Insert unless the (chat_id, msg_id) key is already present."""
        if message.key in self.messages:
            return False
        self.messages[message.key] = message
        return True


def _message_record(message: RawMessage) -> dict:
    media_path = None
    if message.media_ref is not None:
        c = message.media_ref.checksum
        media_path = f"{_BLOB_DIR}/{c[:2]}/{c}"
    return message_to_export_obj(message, media_path)


def _message_from_record(obj: dict, source: str, lineno: int) -> RawMessage:
    try:
        media_ref = None
        if "media_path" in obj:
            checksum = obj["media_path"].rsplit("/", 1)[-1]
            media_ref = BlobRef(
                checksum=checksum,
                size_bytes=int(obj["media_size"]),
                media_kind=obj["media_kind"],
            )
        message = RawMessage(
            msg_id=obj["msg_id"],
            chat_id=obj["chat_id"],
            sender=obj["sender_id"],
            sent_at=parse_utc_timestamp(obj["sent_at"]),
            media_kind=obj["media_kind"],
            text=obj.get("text"),
            media_ref=media_ref,
        )
        message.validate()
        return message
    except (KeyError, TypeError, ValueError, ValidationError) as exc:
        raise SnapshotIntegrityError(f"{source} line {lineno}: bad message record ({exc})") from None


def _cluster_record(cluster: ContentCluster) -> dict:
    obj = {
        "cluster_id": cluster.cluster_id,
        "kind": cluster.kind,
        "fingerprint": cluster.fingerprint,
        "members": [[c, m] for c, m in cluster.members],
        "share_count": cluster.share_count,
        "distinct_groups": cluster.distinct_groups,
        "distinct_senders": cluster.distinct_senders,
        "first_seen": format_utc_timestamp(cluster.first_seen),
        "last_seen": format_utc_timestamp(cluster.last_seen),
    }
    if cluster.representative_text is not None:
        obj["representative_text"] = cluster.representative_text
    if cluster.representative_blob is not None:
        obj["representative_blob"] = {
            "checksum": cluster.representative_blob.checksum,
            "size_bytes": cluster.representative_blob.size_bytes,
            "media_kind": cluster.representative_blob.media_kind,
        }
    return obj


def _cluster_from_record(obj: dict, source: str, lineno: int) -> ContentCluster:
    try:
        blob = None
        if "representative_blob" in obj:
            b = obj["representative_blob"]
            blob = BlobRef(
                checksum=b["checksum"],
                size_bytes=int(b["size_bytes"]),
                media_kind=b["media_kind"],
            )
        cluster = ContentCluster(
            cluster_id=obj["cluster_id"],
            kind=obj["kind"],
            fingerprint=obj["fingerprint"],
            members=tuple((c, m) for c, m in obj["members"]),
            share_count=int(obj["share_count"]),
            distinct_groups=int(obj["distinct_groups"]),
            distinct_senders=int(obj["distinct_senders"]),
            first_seen=parse_utc_timestamp(obj["first_seen"]),
            last_seen=parse_utc_timestamp(obj["last_seen"]),
            representative_text=obj.get("representative_text"),
            representative_blob=blob,
        )
        cluster.validate()
        return cluster
    except (KeyError, TypeError, ValueError, ValidationError) as exc:
        raise SnapshotIntegrityError(f"{source} line {lineno}: bad cluster record ({exc})") from None


def snapshot(dataset: Dataset) -> Path:
    """Write the dataset's tables to its directory; returns the root.

    Rows are emitted in a fixed sort order and serialized canonically, so the
    same tables always produce byte-identical files.
    """
    root = dataset.root
    root.mkdir(parents=True, exist_ok=True)

    registry_bytes = (canonical_json(dataset.registry.to_json_obj()) + "\n").encode("utf-8")
    _atomic_write(root / _REGISTRY, registry_bytes)

    message_lines = [
        _dump_guarded_line(_message_record(dataset.messages[key]))
        for key in sorted(dataset.messages)
    ]
    _atomic_write(root / _MESSAGES, ("".join(line + "\n" for line in message_lines)).encode("utf-8"))

    cluster_lines = [
        _dump_guarded_line(_cluster_record(c))
        for c in sorted(dataset.clusters, key=lambda c: c.cluster_id)
    ]
    _atomic_write(root / _CLUSTERS, ("".join(line + "\n" for line in cluster_lines)).encode("utf-8"))

    meta = {
        "format_version": FORMAT_VERSION,
        "ingest": dataset.ingest_stats,
        "fingerprint_failures": [
            f.to_json_obj()
            for f in sorted(dataset.fingerprint_failures, key=lambda f: (f.chat_id, f.msg_id))
        ],
        "registry_md5": checksum128(registry_bytes),
    }
    _atomic_write(root / _META, (canonical_json(meta) + "\n").encode("utf-8"))
    return root


def _check_referential_integrity(dataset: Dataset) -> None:
    failed = {(f.chat_id, f.msg_id) for f in dataset.fingerprint_failures}
    for cluster in dataset.clusters:
        for key in cluster.members:
            if key not in dataset.messages:
                raise SnapshotIntegrityError(
                    f"cluster {cluster.cluster_id} references missing message {key}"
                )
    for key, message in dataset.messages.items():
        if message.media_ref is None:
            continue
        if not dataset.blobs.exists(message.media_ref.checksum) and key not in failed:
            raise SnapshotIntegrityError(
                f"message {key} references missing blob {message.media_ref.checksum}"
            )


def load_snapshot(path: Path) -> Dataset:
    """Load a dataset directory written by `snapshot`, verifying integrity."""
    root = Path(path)
    meta_path = root / _META
    if not meta_path.exists():
        raise StorageError(f"{root} is not a dataset (no {_META})")
    with open(meta_path, encoding="utf-8") as fh:
        meta = json.load(fh)
    version = meta.get("format_version")
    if version != FORMAT_VERSION:
        raise MigrationError(
            f"snapshot format version {version!r} needs migration (this build reads {FORMAT_VERSION})"
        )

    dataset = Dataset(root=root)
    dataset.ingest_stats = meta.get("ingest", {})
    dataset.fingerprint_failures = [
        FingerprintFailure(**obj) for obj in meta.get("fingerprint_failures", [])
    ]

    try:
        registry_bytes = (root / _REGISTRY).read_bytes()
    except OSError as exc:
        raise StorageError(f"cannot read {_REGISTRY}: {exc}") from exc
    if checksum128(registry_bytes) != meta.get("registry_md5"):
        raise SnapshotIntegrityError(f"{_REGISTRY}: integrity check failed")
    dataset.registry = ChatRegistry.from_json_obj(json.loads(registry_bytes))

    messages_path = root / _MESSAGES
    if not messages_path.exists():
        raise StorageError(f"dataset at {root} has no {_MESSAGES}")
    with open(messages_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = _load_guarded_line(line, _MESSAGES, lineno)
            message = _message_from_record(obj, _MESSAGES, lineno)
            if not dataset.add_message(message):
                raise SnapshotIntegrityError(
                    f"{_MESSAGES} line {lineno}: duplicate message key {message.key}"
                )

    clusters_path = root / _CLUSTERS
    if clusters_path.exists():
        with open(clusters_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                obj = _load_guarded_line(line, _CLUSTERS, lineno)
                dataset.clusters.append(_cluster_from_record(obj, _CLUSTERS, lineno))

    _check_referential_integrity(dataset)
    return dataset


def open_or_create(path: Path) -> Dataset:
    """Load an existing dataset or start an empty one at the path."""
    root = Path(path)
    if (root / _META).exists():
        return load_snapshot(root)
    return Dataset(root=root)
