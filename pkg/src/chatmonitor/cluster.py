"""Group fingerprinted messages into content clusters.

Two messages of the same media kind are "similar" when:

* audio/video/document: checksums are equal;
* image: perceptual hashes are within a Hamming-distance threshold;
* text: shingle-set Jaccard is at or above a threshold, except that messages
  with fewer than two shingles only merge on exact normalized equality
  (tiny messages otherwise over-merge).

Clusters are the transitive closure of that relation (single-link merging via
union-find), computed per media kind, so the output partitions the input and
is independent of message order.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from .fingerprint import MessagePrint, hamming, jaccard
from .ingest import ChatRegistry
from .models import ContentCluster, RawMessage, ValidationError


class IntegrityError(Exception):
    """A cluster references a message or chat that is not in the store."""


@dataclass(frozen=True)
class ClusterThresholds:
    """Similarity operating points; exposed in the operator config."""

    image_hamming: int = 10  # of 64 bits
    text_jaccard: float = 0.7

    def validate(self) -> None:
        if not 0 <= self.image_hamming <= 64:
            raise ValidationError(f"image_hamming must be in [0, 64], got {self.image_hamming}")
        if not 0.0 <= self.text_jaccard <= 1.0:
            raise ValidationError(f"text_jaccard must be in [0, 1], got {self.text_jaccard}")


class UnionFind:
    """Disjoint sets over arbitrary hashable items, with path compression."""

    def __init__(self) -> None:
        self._parent: dict = {}

    def add(self, item) -> None:
        self._parent.setdefault(item, item)

    def find(self, item):
        parent = self._parent
        root = item
        while parent[root] != root:
            root = parent[root]
        while parent[item] != root:
            parent[item], item = root, parent[item]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # deterministic orientation: smaller key becomes the root
            if rb < ra:
                ra, rb = rb, ra
            self._parent[rb] = ra

    def groups(self) -> list[list]:
        by_root = defaultdict(list)
        for item in self._parent:
            by_root[self.find(item)].append(item)
        return [sorted(members) for _, members in sorted(by_root.items())]


class BKTree:
    """BK-tree over 64-bit hashes under the Hamming metric.

    Stores each distinct hash once; `query(h, d)` returns exactly the stored
    hashes within distance d, ascending by (distance, value).
    """

    def __init__(self) -> None:
        self._root: list | None = None  # [hash, {distance: child}]
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, value: int) -> None:
        if self._root is None:
            self._root = [value, {}]
            self._size = 1
            return
        node = self._root
        while True:
            dist = hamming(value, node[0])
            if dist == 0:
                return  # already stored
            child = node[1].get(dist)
            if child is None:
                node[1][dist] = [value, {}]
                self._size += 1
                return
            node = child

    def query(self, value: int, max_distance: int) -> list[int]:
        if not 0 <= max_distance <= 64:
            raise ValidationError(f"distance must be in [0, 64], got {max_distance}")
        if self._root is None:
            return []
        hits: list[tuple[int, int]] = []
        stack = [self._root]
        while stack:
            node = stack.pop()
            dist = hamming(value, node[0])
            if dist <= max_distance:
                hits.append((dist, node[0]))
            lo, hi = dist - max_distance, dist + max_distance
            for child_dist, child in node[1].items():
                if lo <= child_dist <= hi:
                    stack.append(child)
        hits.sort()
        return [h for _, h in hits]


def _member_sort_key(print_: MessagePrint) -> tuple:
    m = print_.message
    return (m.sent_at, m.chat_id, m.msg_id)


def _make_cluster(kind: str, members: list[MessagePrint]) -> ContentCluster:
    members = sorted(members, key=_member_sort_key)
    earliest = members[0]
    fingerprint = min(p.fingerprint_hex for p in members)
    keys = tuple(sorted(p.message.key for p in members))
    senders = {p.message.sender for p in members}
    chats = {p.message.chat_id for p in members}
    cluster = ContentCluster(
        cluster_id=f"{kind}-{fingerprint}",
        kind=kind,
        fingerprint=fingerprint,
        members=keys,
        share_count=len(keys),
        distinct_groups=len(chats),
        distinct_senders=len(senders),
        first_seen=members[0].message.sent_at,
        last_seen=max(p.message.sent_at for p in members),
        representative_text=earliest.norm_text if kind == "text" else None,
        representative_blob=earliest.message.media_ref if kind != "text" else None,
    )
    cluster.validate()
    return cluster


def _cluster_images(prints: list[MessagePrint], max_hamming: int) -> list[list[MessagePrint]]:
    by_hash: dict[int, list[MessagePrint]] = defaultdict(list)
    for p in prints:
        by_hash[p.phash].append(p)
    hashes = sorted(by_hash)
    tree = BKTree()
    for h in hashes:
        tree.add(h)
    uf = UnionFind()
    for h in hashes:
        uf.add(h)
    for h in hashes:
        for near in tree.query(h, max_hamming):
            uf.union(h, near)
    return [
        [p for h in group for p in by_hash[h]]
        for group in uf.groups()
    ]


def _cluster_checksums(prints: list[MessagePrint]) -> list[list[MessagePrint]]:
    by_sum: dict[str, list[MessagePrint]] = defaultdict(list)
    for p in prints:
        by_sum[p.checksum].append(p)
    return [by_sum[c] for c in sorted(by_sum)]


def _cluster_texts(prints: list[MessagePrint], min_jaccard: float) -> list[list[MessagePrint]]:
    # Distinct normalized texts merge first (Jaccard 1.0 by definition), then
    # near-duplicate comparison runs once per distinct shingle set. Candidate
    # pairs come from an inverted shingle index: pairs sharing no shingle have
    # Jaccard 0 and can never merge, so the pre-bucketing is lossless.
    by_text: dict[str, list[MessagePrint]] = defaultdict(list)
    for p in prints:
        by_text[p.norm_text].append(p)
    texts = sorted(by_text)
    shingles = {t: by_text[t][0].shingles for t in texts}

    uf = UnionFind()
    for t in texts:
        uf.add(t)
    index: dict[str, list[str]] = defaultdict(list)
    for t in texts:
        if len(shingles[t]) < 2:
            continue  # merges only on exact normalized equality, handled by by_text
        seen: set[str] = set()
        for sh in shingles[t]:
            for other in index[sh]:
                if other in seen:
                    continue
                seen.add(other)
                if jaccard(shingles[t], shingles[other]) >= min_jaccard:
                    uf.union(t, other)
            index[sh].append(t)
    return [
        [p for t in group for p in by_text[t]]
        for group in uf.groups()
    ]


def build_clusters(
    prints: list[MessagePrint], thresholds: ClusterThresholds | None = None
) -> list[ContentCluster]:
    """Partition fingerprinted messages into content clusters.

    Returns clusters for every media kind present, sorted by cluster_id.
    Input order never affects the result. Messages whose fingerprinting
    failed must be excluded by the caller (they are reported, not clustered).
    """
    thresholds = thresholds or ClusterThresholds()
    thresholds.validate()
    by_kind: dict[str, list[MessagePrint]] = defaultdict(list)
    for p in prints:
        by_kind[p.message.media_kind].append(p)

    clusters: list[ContentCluster] = []
    for kind in sorted(by_kind):
        kind_prints = by_kind[kind]
        if kind == "image":
            groups = _cluster_images(kind_prints, thresholds.image_hamming)
        elif kind == "text":
            groups = _cluster_texts(kind_prints, thresholds.text_jaccard)
        else:
            groups = _cluster_checksums(kind_prints)
        clusters.extend(_make_cluster(kind, g) for g in groups)
    clusters.sort(key=lambda c: c.cluster_id)
    return clusters


@dataclass(frozen=True)
class ClusterStats:
    share_count: int
    distinct_groups: int
    distinct_senders: int
    group_titles: tuple[str, ...]


def cluster_stats(
    cluster: ContentCluster,
    messages: dict[tuple[str, str], RawMessage],
    registry: ChatRegistry,
) -> ClusterStats:
    """Recount a cluster's popularity counters from the message store.

    Group titles are deduplicated and sorted. A member that is missing from
    the store (or references an unknown chat) is an integrity error.
    """
    senders: set[str] = set()
    chats: set[str] = set()
    for key in cluster.members:
        message = messages.get(key)
        if message is None:
            raise IntegrityError(f"cluster {cluster.cluster_id} references missing message {key}")
        senders.add(message.sender)
        chats.add(message.chat_id)
    titles = []
    for chat_id in chats:
        record = registry.get(chat_id)
        if record is None:
            raise IntegrityError(
                f"cluster {cluster.cluster_id} references unknown chat {chat_id!r}"
            )
        titles.append(record.title)
    return ClusterStats(
        share_count=len(cluster.members),
        distinct_groups=len(chats),
        distinct_senders=len(senders),
        group_titles=tuple(sorted(set(titles))),
    )
