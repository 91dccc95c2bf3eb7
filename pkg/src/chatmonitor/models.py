"""Domain records shared across the pipeline, plus strict timestamp handling.

All timestamps are timezone-aware UTC with second resolution; inputs carrying
a non-UTC offset (or no offset at all) are rejected so that daily and weekly
bucketing is unambiguous.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import date, datetime, timezone

MEDIA_KINDS = ("text", "image", "video", "audio", "document")
CHAT_KINDS = ("group", "channel")

# Platform cap on group membership; channels are unbounded.
GROUP_MEMBER_CAP = 200_000

_TIMESTAMP_RE = re.compile(
    r"^(\d{4}-\d{2}-\d{2})[Tt ](\d{2}:\d{2}:\d{2})(\.\d+)?(Z|z|[+-]\d{2}:\d{2})$"
)


class ValidationError(ValueError):
    """A record or input line violates the documented schema or an invariant."""


def parse_utc_timestamp(value: str) -> datetime:
    """Parse an RFC-3339 timestamp, requiring an explicit UTC offset.

    Local-time inputs (naive or with a non-zero offset) are rejected.
    Fractional seconds are truncated; the store works at second resolution.
    """
    if not isinstance(value, str):
        raise ValidationError(f"timestamp must be a string, got {type(value).__name__}")
    m = _TIMESTAMP_RE.match(value)
    if m is None:
        raise ValidationError(f"not an RFC-3339 timestamp: {value!r}")
    offset = m.group(4)
    if offset.upper() != "Z" and offset != "+00:00" and offset != "-00:00":
        raise ValidationError(f"timestamp must be UTC, got offset {offset!r}: {value!r}")
    try:
        dt = datetime.fromisoformat(f"{m.group(1)}T{m.group(2)}+00:00")
    except ValueError as exc:
        raise ValidationError(f"invalid timestamp {value!r}: {exc}") from None
    return dt


def format_utc_timestamp(dt: datetime) -> str:
    """Render a UTC datetime in the canonical `YYYY-MM-DDTHH:MM:SSZ` form."""
    if dt.tzinfo is None or dt.utcoffset() != timezone.utc.utcoffset(None):
        raise ValidationError(f"datetime is not UTC-aware: {dt!r}")
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def canonical_json(obj) -> str:
    """Deterministic JSON used for persisted lines and integrity checks."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class ChatRecord:
    """A monitored group or channel.

    `member_count` counts members for groups and subscribers for channels.
    """

    chat_id: str
    kind: str
    title: str
    member_count: int
    joined_at: datetime

    def validate(self) -> None:
        if not self.chat_id:
            raise ValidationError("chat_id must be non-empty")
        if self.kind not in CHAT_KINDS:
            raise ValidationError(f"unknown chat kind {self.kind!r}")
        if self.member_count < 0:
            raise ValidationError(f"member_count must be >= 0, got {self.member_count}")
        if self.kind == "group" and self.member_count > GROUP_MEMBER_CAP:
            raise ValidationError(
                f"group member_count {self.member_count} exceeds platform cap {GROUP_MEMBER_CAP}"
            )

    def to_json_obj(self) -> dict:
        return {
            "chat_id": self.chat_id,
            "kind": self.kind,
            "title": self.title,
            "member_count": self.member_count,
            "joined_at": format_utc_timestamp(self.joined_at),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ChatRecord":
        try:
            record = cls(
                chat_id=obj["chat_id"],
                kind=obj["kind"],
                title=obj["title"],
                member_count=int(obj["member_count"]),
                joined_at=parse_utc_timestamp(obj["joined_at"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad chat record: {exc}") from None
        record.validate()
        return record


@dataclass(frozen=True)
class BlobRef:
    """Content-addressed reference to a stored media payload."""

    checksum: str  # 32 lowercase hex chars (Checksum128)
    size_bytes: int
    media_kind: str


@dataclass(frozen=True)
class RawMessage:
    """One normalized chat message with a pseudonymized sender.

    `sender` holds the 32-hex pseudonym, never a raw identifier. A text
    message has `text` and no `media_ref`; a media message has `media_ref`
    and may keep `text` as its caption.
    """

    msg_id: str
    chat_id: str
    sender: str
    sent_at: datetime
    media_kind: str
    text: str | None = None
    media_ref: BlobRef | None = None

    @property
    def key(self) -> tuple[str, str]:
        return (self.chat_id, self.msg_id)

    def validate(self) -> None:
        if not self.msg_id or not self.chat_id:
            raise ValidationError("msg_id and chat_id must be non-empty")
        if self.media_kind not in MEDIA_KINDS:
            raise ValidationError(f"unknown media kind {self.media_kind!r}")
        if self.media_kind == "text":
            if self.text is None:
                raise ValidationError("text message without text")
            if self.media_ref is not None:
                raise ValidationError("text message must not carry a media reference")
        elif self.media_ref is None:
            raise ValidationError(f"{self.media_kind} message without media reference")


@dataclass(frozen=True)
class InviteLink:
    """A public invite URL and its extracted group key."""

    url: str
    group_key: str


@dataclass(frozen=True)
class ContentCluster:
    """All messages judged to carry the same content, with popularity counters.

    `cluster_id` is content-addressed: the media kind plus the
    lexicographically smallest member fingerprint in hex, so identical data
    always re-clusters under the same identity.
    """

    cluster_id: str
    kind: str
    fingerprint: str  # smallest member fingerprint, fixed-width lowercase hex
    members: tuple[tuple[str, str], ...]  # (chat_id, msg_id), sorted
    share_count: int
    distinct_groups: int
    distinct_senders: int
    first_seen: datetime
    last_seen: datetime
    representative_text: str | None = None
    representative_blob: BlobRef | None = None

    def validate(self) -> None:
        if self.share_count != len(self.members) or self.share_count < 1:
            raise ValidationError("share_count must equal the number of members (>= 1)")
        if not (1 <= self.distinct_groups <= self.share_count):
            raise ValidationError("distinct_groups out of range")
        if not (1 <= self.distinct_senders <= self.share_count):
            raise ValidationError("distinct_senders out of range")
        if self.first_seen > self.last_seen:
            raise ValidationError("first_seen must not be after last_seen")


@dataclass(frozen=True)
class Period:
    """An inclusive range of UTC calendar dates."""

    start_date: date
    end_date: date

    def __post_init__(self) -> None:
        if self.start_date > self.end_date:
            raise ValidationError(
                f"period start {self.start_date} is after end {self.end_date}"
            )

    def contains(self, dt: datetime) -> bool:
        return self.start_date <= dt.date() <= self.end_date


@dataclass(frozen=True)
class RankingEntry:
    """A cluster's position in a per-period, per-media-type ranking."""

    rank: int
    cluster_id: str
    period_share_count: int
    period_distinct_groups: int
    period_distinct_senders: int
