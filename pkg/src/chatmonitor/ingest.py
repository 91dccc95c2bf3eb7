"""Parse chat-export archives into normalized, pseudonymized messages.

Export files are JSON Lines, one message object per line:

    {"msg_id": "...", "chat_id": "...", "sender_id": "...",
     "sent_at": "2021-03-01T10:00:00Z", "media_kind": "text|image|video|audio|document",
     "text": "...",            # required for text, optional caption otherwise
     "media_path": "rel/path"} # required for non-text, relative to the export file

Invalid lines are skipped with a per-line warning, never partially parsed;
real exports are dirty and partial ingestion beats none. Raw sender
identifiers are replaced by a keyed MAC before anything is persisted.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .fingerprint import checksum128
from .models import (
    BlobRef,
    ChatRecord,
    InviteLink,
    MEDIA_KINDS,
    RawMessage,
    ValidationError,
    parse_utc_timestamp,
)

logger = logging.getLogger(__name__)

_INVITE_RE = re.compile(
    r"https://t\.me/joinchat/([A-Za-z0-9_-]+)|https://telegram\.me/([A-Za-z0-9_-]+)"
)

# Fields a serialized message may carry; anything unknown is tolerated on read.
_EXPORT_FIELDS = {"msg_id", "chat_id", "sender_id", "sent_at", "media_kind", "text", "media_path"}


class ConfigError(Exception):
    """Bad operator configuration (e.g. an empty pseudonymization secret)."""


def pseudonymize(sender_id: str, secret: bytes) -> str:
    """Keyed, irreversible 32-hex pseudonym for a raw sender identifier.

    HMAC-SHA256 truncated to 128 bits. A keyed MAC (rather than a plain hash)
    prevents dictionary reversal of phone-number-like identifiers.
    """
    if not secret:
        raise ConfigError("pseudonymization secret must be non-empty")
    digest = hmac.new(secret, sender_id.encode("utf-8"), hashlib.sha256).hexdigest()
    return digest[:32]


def extract_invite_links(text: str) -> list[InviteLink]:
    """All invite URLs in order of appearance; duplicates retained.

    Matches `https://t.me/joinchat/<GroupID>` and `https://telegram.me/<GroupID>`
    where GroupID is a maximal run of [A-Za-z0-9_-].
    """
    links = []
    for m in _INVITE_RE.finditer(text):
        key = m.group(1) if m.group(1) is not None else m.group(2)
        links.append(InviteLink(url=m.group(0), group_key=key))
    return links


@dataclass
class ChatRegistry:
    """The set of monitored chats, keyed by chat_id."""

    chats: dict[str, ChatRecord] = field(default_factory=dict)

    def register(self, record: ChatRecord) -> None:
        """Upsert by chat_id; title and member_count are overwritten."""
        record.validate()
        self.chats[record.chat_id] = record

    def get(self, chat_id: str) -> ChatRecord | None:
        return self.chats.get(chat_id)

    def __len__(self) -> int:
        return len(self.chats)

    def records(self) -> list[ChatRecord]:
        return [self.chats[cid] for cid in sorted(self.chats)]

    def to_json_obj(self) -> list[dict]:
        return [r.to_json_obj() for r in self.records()]

    @classmethod
    def from_json_obj(cls, obj: list) -> "ChatRegistry":
        registry = cls()
        for item in obj:
            registry.register(ChatRecord.from_json_obj(item))
        return registry

    @classmethod
    def load(cls, path: Path) -> "ChatRegistry":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, list):
            raise ValidationError(f"{path}: chat registry must be a JSON array")
        return cls.from_json_obj(data)


@dataclass
class ParseReport:
    """Outcome of parsing one export file."""

    path: str
    parsed: int = 0
    invalid: int = 0
    duplicates: int = 0
    invalid_lines: list[int] = field(default_factory=list)


def _require_str(obj: dict, key: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value:
        raise ValidationError(f"field {key!r} missing or not a non-empty string")
    return value


def parse_export_line(
    obj: dict,
    secret: bytes,
    resolve_media: Callable[[str, str], BlobRef] | None = None,
) -> RawMessage:
    """Validate one export object and build the pseudonymized message.

    `resolve_media(media_path, media_kind)` turns the payload reference into a
    BlobRef; omitting it checks schema shape only and leaves a zero-size ref.
    """
    if not isinstance(obj, dict):
        raise ValidationError("line is not a JSON object")
    msg_id = _require_str(obj, "msg_id")
    chat_id = _require_str(obj, "chat_id")
    sender_id = _require_str(obj, "sender_id")
    sent_at = parse_utc_timestamp(obj.get("sent_at"))
    media_kind = _require_str(obj, "media_kind")
    if media_kind not in MEDIA_KINDS:
        raise ValidationError(f"unknown media kind {media_kind!r}")
    text = obj.get("text")
    if text is not None and not isinstance(text, str):
        raise ValidationError("field 'text' must be a string")
    media_path = obj.get("media_path")

    media_ref = None
    if media_kind == "text":
        if text is None:
            raise ValidationError("text message without 'text'")
        if media_path is not None:
            raise ValidationError("text message must not carry 'media_path'")
    else:
        if not isinstance(media_path, str) or not media_path:
            raise ValidationError(f"{media_kind} message without 'media_path'")
        if resolve_media is not None:
            media_ref = resolve_media(media_path, media_kind)
        else:
            media_ref = BlobRef(checksum=checksum128(b""), size_bytes=0, media_kind=media_kind)

    message = RawMessage(
        msg_id=msg_id,
        chat_id=chat_id,
        sender=pseudonymize(sender_id, secret),
        sent_at=sent_at,
        media_kind=media_kind,
        text=text,
        media_ref=media_ref,
    )
    message.validate()
    return message


def parse_export(
    path: Path,
    secret: bytes,
    store_blob: Callable[[bytes, str], BlobRef] | None = None,
) -> tuple[list[RawMessage], ParseReport]:
    """Parse one JSON-Lines export file.

    Media payloads are read relative to the export file's directory and handed
    to `store_blob(payload, media_kind)`; with no sink, the payload is only
    checksummed to build the reference. Unreadable files raise OSError (fatal
    for the caller); malformed lines are skipped with a warning.
    """
    path = Path(path)
    base_dir = path.parent
    report = ParseReport(path=str(path))
    messages: list[RawMessage] = []
    seen: set[tuple[str, str]] = set()

    def resolve_media(media_path: str, media_kind: str) -> BlobRef:
        rel = Path(media_path)
        if rel.is_absolute() or ".." in rel.parts:
            raise ValidationError(f"media_path must be a plain relative path: {media_path!r}")
        payload = (base_dir / rel).read_bytes()
        if store_blob is not None:
            return store_blob(payload, media_kind)
        return BlobRef(checksum=checksum128(payload), size_bytes=len(payload), media_kind=media_kind)

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                message = parse_export_line(obj, secret, resolve_media)
            except (json.JSONDecodeError, ValidationError, OSError) as exc:
                report.invalid += 1
                report.invalid_lines.append(lineno)
                logger.warning("%s line %d: skipped (%s)", path, lineno, exc)
                continue
            if message.key in seen:
                report.duplicates += 1
                logger.warning(
                    "%s line %d: duplicate (chat_id, msg_id) %s, skipped", path, lineno, message.key
                )
                continue
            seen.add(message.key)
            messages.append(message)
            report.parsed += 1
    return messages, report


def message_to_export_obj(message: RawMessage, media_path: str | None = None) -> dict:
    """Serialize a message back to a schema-valid export object.

    The sender slot carries the pseudonym; a media message needs the relative
    path its payload is reachable at (for the store, the blob path).
    """
    from .models import format_utc_timestamp

    obj = {
        "msg_id": message.msg_id,
        "chat_id": message.chat_id,
        "sender_id": message.sender,
        "sent_at": format_utc_timestamp(message.sent_at),
        "media_kind": message.media_kind,
    }
    if message.text is not None:
        obj["text"] = message.text
    if message.media_ref is not None:
        obj["media_path"] = media_path
        obj["media_size"] = message.media_ref.size_bytes
    return obj
