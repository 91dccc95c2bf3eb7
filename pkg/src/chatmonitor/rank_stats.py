"""Per-period popularity rankings and aggregate corpus statistics.

A "day" is the UTC calendar date of a message's sent_at; weeks are ISO-8601
(Monday start). Clustering runs once over the whole corpus and these
functions re-slice the counters per query period, so cluster identities stay
stable across days.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from typing import Iterable
from urllib.parse import quote

from .cluster import IntegrityError
from .ingest import ChatRegistry
from .models import (
    ContentCluster,
    Period,
    RankingEntry,
    RawMessage,
    ValidationError,
)


class UnknownClusterError(KeyError):
    """Requested cluster_id does not exist."""


def reverse_image_search_url(public_media_url: str) -> str:
    """Reverse-image-search URL for a publicly reachable media URL.

    Constructed only, never fetched.
    """
    return f"https://lens.google.com/uploadbyurl?url={quote(public_media_url, safe='')}"


def _period_members(
    cluster: ContentCluster,
    messages: dict[tuple[str, str], RawMessage],
    period: Period,
) -> list[RawMessage]:
    members = []
    for key in cluster.members:
        message = messages.get(key)
        if message is None:
            raise IntegrityError(f"cluster {cluster.cluster_id} references missing message {key}")
        if period.contains(message.sent_at):
            members.append(message)
    return members


def top_content(
    clusters: Iterable[ContentCluster],
    messages: dict[tuple[str, str], RawMessage],
    period: Period,
    kind: str,
    limit: int,
) -> list[RankingEntry]:
    """Rank clusters of one media kind by in-period popularity.

    Only clusters with at least one member in the period appear; counters are
    restricted to in-period members. Order: share count desc, distinct groups
    desc, distinct senders desc, then first_seen asc and cluster_id asc so the
    ranking is a total order (stable pagination).
    """
    if limit < 1:
        raise ValidationError(f"limit must be >= 1, got {limit}")
    scored = []
    for cluster in clusters:
        if cluster.kind != kind:
            continue
        members = _period_members(cluster, messages, period)
        if not members:
            continue
        share = len(members)
        groups = len({m.chat_id for m in members})
        senders = len({m.sender for m in members})
        scored.append((-share, -groups, -senders, cluster.first_seen, cluster.cluster_id, share, groups, senders))
    scored.sort(key=lambda row: row[:5])
    return [
        RankingEntry(
            rank=i + 1,
            cluster_id=row[4],
            period_share_count=row[5],
            period_distinct_groups=row[6],
            period_distinct_senders=row[7],
        )
        for i, row in enumerate(scored[:limit])
    ]


@dataclass(frozen=True)
class ClusterDetails:
    """Everything the spread-details view shows for one cluster."""

    cluster_id: str
    kind: str
    period_share_count: int
    period_distinct_groups: int
    period_distinct_senders: int
    group_titles: tuple[str, ...]
    representative_text: str | None
    representative_checksum: str | None
    reverse_search_url: str | None  # images only


def content_details(
    cluster_id: str,
    clusters: dict[str, ContentCluster],
    messages: dict[tuple[str, str], RawMessage],
    registry: ChatRegistry,
    period: Period | None = None,
    media_url_base: str | None = None,
) -> ClusterDetails:
    """Period counters, spread list, and representative reference for a cluster.

    With no period, counters cover the cluster's whole history. The reverse
    image search URL is built only for image clusters, and only when a public
    base URL for media is configured.
    """
    cluster = clusters.get(cluster_id)
    if cluster is None:
        raise UnknownClusterError(cluster_id)
    if period is None:
        period = Period(cluster.first_seen.date(), cluster.last_seen.date())
    members = _period_members(cluster, messages, period)
    chats = {m.chat_id for m in members}
    titles = set()
    for chat_id in chats:
        record = registry.get(chat_id)
        if record is None:
            raise IntegrityError(f"cluster {cluster_id} references unknown chat {chat_id!r}")
        titles.add(record.title)

    search_url = None
    checksum = cluster.representative_blob.checksum if cluster.representative_blob else None
    if cluster.kind == "image" and checksum and media_url_base is not None:
        public_url = f"{media_url_base.rstrip('/')}/api/media/{checksum}"
        search_url = reverse_image_search_url(public_url)

    return ClusterDetails(
        cluster_id=cluster.cluster_id,
        kind=cluster.kind,
        period_share_count=len(members),
        period_distinct_groups=len(chats),
        period_distinct_senders=len({m.sender for m in members}),
        group_titles=tuple(sorted(titles)),
        representative_text=cluster.representative_text,
        representative_checksum=checksum,
        reverse_search_url=search_url,
    )


def members_cdf(
    registry: ChatRegistry, kind: str | None = None
) -> list[tuple[int, float]]:
    """Empirical CDF of member counts over the registry.

    One point per distinct member_count m, ascending: the fraction of chats
    with member_count <= m. The final fraction is exactly 1.0. `kind`
    optionally restricts to groups or channels.
    """
    counts = sorted(
        r.member_count for r in registry.records() if kind is None or r.kind == kind
    )
    if not counts:
        raise ValidationError("members_cdf over an empty registry")
    total = len(counts)
    points: list[tuple[int, float]] = []
    below = 0
    i = 0
    while i < total:
        value = counts[i]
        while i < total and counts[i] == value:
            i += 1
        below = i
        points.append((value, below / total))
    return points


def _week_label(d: date) -> str:
    year, week, _ = d.isocalendar()
    return f"{year:04d}-W{week:02d}"


def _week_monday(d: date) -> date:
    return d - timedelta(days=d.isoweekday() - 1)


def weekly_volume(
    messages: Iterable[RawMessage | datetime],
) -> list[tuple[str, int]]:
    """Message counts per ISO-8601 week, ascending.

    Weeks with no messages inside the observed range are included with count
    0. Accepts messages or bare UTC datetimes (the bucketing only needs the
    timestamp).
    """
    mondays = Counter()
    for item in messages:
        ts = item if isinstance(item, datetime) else item.sent_at
        mondays[_week_monday(ts.date())] += 1
    if not mondays:
        return []
    series = []
    monday = min(mondays)
    last = max(mondays)
    while monday <= last:
        series.append((_week_label(monday), mondays.get(monday, 0)))
        monday += timedelta(weeks=1)
    return series
