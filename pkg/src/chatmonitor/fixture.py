"""Deterministic synthetic corpus with planted duplicates and a ground-truth manifest.

The generator lays out a complete input tree for the pipeline:

    out/
      registry.json          chats the exports came from
      chat_<id>.jsonl        one export per chat, lines sorted by msg_id
      media/                 image and binary payloads referenced by exports
      manifest.json          planted groups, expected cluster counts, raw senders
      config.ini             ready-to-use pipeline config
      accounts.json          one analyst account (plaintext kept in the manifest)
      secret.key             pseudonymization key

Duplicate structure, all seed-driven:

  - image groups: one PNG original plus 3..10 lossy copies (JPEG quality 75,
    about half additionally rescaled to 80% with a bilinear filter)
  - text groups: one 12-word message plus 2..5 variants (exact copy, last word
    swapped, or one word appended) built from a vocabulary unique to the group
  - video / audio / document groups: 2..4 messages sharing one payload file
  - the remainder are singleton text messages with disjoint vocabularies; a few
    carry invite links so link scanning has known expectations

Every original image is admitted only if its perceptual hash sits at Hamming
distance >= 16 from all previously admitted originals, so planted groups can
never bleed into each other under the distance-10 clustering threshold.

Running the generator twice with the same seed and size produces byte-identical
trees; keep it free of wall-clock and filesystem-order dependencies.
"""

from __future__ import annotations

import io
import json
import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.fft import idct

from .auth import hash_password
from .fingerprint import hamming, phash64
from .models import ChatRecord, ValidationError, format_utc_timestamp

FIXTURE_START = datetime(2021, 2, 22, tzinfo=timezone.utc)
FIXTURE_DAYS = 14

_IMG_SIZE = 128
_MIN_ORIGINAL_DISTANCE = 16
_SYLLABLES = (
    "ba", "co", "da", "fe", "go", "hi", "ju", "ka", "lo", "ma",
    "ne", "or", "pa", "qui", "ro", "sa", "te", "ul", "va", "zo",
)
_LINK_ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_-"


@dataclass
class _PlannedMessage:
    media_kind: str
    chat_id: str
    sender_id: str
    sent_at: datetime
    text: str | None = None
    media_path: str | None = None
    group_index: int | None = None
    msg_id: int = 0


def _word(rng: random.Random, tag: str) -> str:
    return "".join(rng.choice(_SYLLABLES) for _ in range(3)) + tag


def _synth_original(img_rng: np.random.Generator) -> Image.Image:
    """Low-frequency random field, safely away from flat or noisy extremes.

    Coefficients live in the same 8x8 low-frequency block the hash reads, with
    magnitudes 6..12 so every hash bit has real margin against recompression.
    """
    coeff = np.zeros((_IMG_SIZE, _IMG_SIZE))
    block = img_rng.uniform(6.0, 12.0, (8, 8)) * img_rng.choice((-1.0, 1.0), (8, 8))
    block[0, 0] = 0.0
    coeff[:8, :8] = block
    field = idct(idct(coeff, axis=0, norm=None), axis=1, norm=None)
    field -= field.mean()
    field *= 90.0 / np.abs(field).max()
    gains = img_rng.uniform(0.6, 1.0, 3)
    rgb = np.clip(128.0 + field[:, :, None] * gains[None, None, :], 0, 255)
    return Image.fromarray(rgb.astype(np.uint8), "RGB")


def _dupe_bytes(original: Image.Image, rescale: bool) -> bytes:
    img = original
    if rescale:
        side = round(_IMG_SIZE * 0.8)
        img = img.resize((side, side), Image.BILINEAR)
    buf = io.BytesIO()
    img.save(buf, format="JPEG", quality=75)
    return buf.getvalue()


def _png_bytes(img: Image.Image) -> bytes:
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def generate_fixture(out_dir: Path, seed: int = 7, n_messages: int = 10_000) -> dict:
    """Write the full fixture tree under `out_dir` and return its manifest."""
    if n_messages < 100:
        raise ValidationError("fixture needs at least 100 messages")
    out = Path(out_dir)
    media_dir = out / "media"
    media_dir.mkdir(parents=True, exist_ok=True)

    rng = random.Random(seed)
    img_rng = np.random.default_rng(seed)

    chats = []
    for i in range(12):
        kind = "group" if i < 8 else "channel"
        members = rng.randint(50, 20_000) if kind == "group" else rng.randint(500, 150_000)
        chats.append(
            ChatRecord(
                chat_id=f"-100200{i:04d}",
                kind=kind,
                title=f"Desk {kind.capitalize()} {i + 1:02d}",
                member_count=members,
                joined_at=datetime(2020, 12, 1, tzinfo=timezone.utc) + timedelta(days=i),
            )
        )

    senders: list[str] = []
    seen_senders: set[str] = set()
    while len(senders) < max(8, n_messages // 33):
        sid = f"raw-user-{rng.getrandbits(40):010x}"
        if sid not in seen_senders:
            seen_senders.add(sid)
            senders.append(sid)

    def place(plan: _PlannedMessage) -> _PlannedMessage:
        plan.chat_id = rng.choice(chats).chat_id
        plan.sender_id = rng.choice(senders)
        plan.sent_at = FIXTURE_START + timedelta(seconds=rng.randint(0, FIXTURE_DAYS * 86_400 - 1))
        return plan

    plans: list[_PlannedMessage] = []
    groups: list[dict] = []

    def planned(kind: str, group_index: int | None, **fields) -> int:
        plan = place(_PlannedMessage(media_kind=kind, chat_id="", sender_id="",
                                     sent_at=FIXTURE_START, group_index=group_index, **fields))
        plans.append(plan)
        return len(plans) - 1

    # image groups: original PNG + lossy JPEG copies
    n_image_groups = max(1, n_messages // 50)
    accepted_hashes: list[int] = []
    for gi in range(n_image_groups):
        while True:
            original = _synth_original(img_rng)
            h = phash64(np.asarray(original))
            if all(hamming(h, other) >= _MIN_ORIGINAL_DISTANCE for other in accepted_hashes):
                accepted_hashes.append(h)
                break
        rel = f"media/img{gi:03d}_0.png"
        (out / rel).write_bytes(_png_bytes(original))
        indices = [planned("image", gi, media_path=rel)]
        for k in range(rng.randint(3, 10)):
            rel = f"media/img{gi:03d}_{k + 1}.jpg"
            (out / rel).write_bytes(_dupe_bytes(original, rescale=rng.random() < 0.5))
            indices.append(planned("image", gi, media_path=rel))
        groups.append({"kind": "image", "plan_indices": indices})

    # text groups: per-group vocabulary keeps every cross-group similarity at zero
    n_text_groups = max(1, n_messages // 100)
    for gi in range(n_text_groups):
        tag = f"q{gi:03d}"
        words = [_word(rng, tag) for _ in range(12)]
        original_text = " ".join(words)
        indices = [planned("text", n_image_groups + gi, text=original_text)]
        for _ in range(rng.randint(2, 5)):
            variant = rng.randrange(3)
            if variant == 0:
                text = original_text
            elif variant == 1:
                text = " ".join(words[:-1] + [_word(rng, tag)])
            else:
                text = original_text + " " + _word(rng, tag)
            indices.append(planned("text", n_image_groups + gi, text=text))
        groups.append({"kind": "text", "plan_indices": indices})

    # exact-payload groups for the checksum kinds
    n_blob_groups = max(1, n_messages // 200)
    blob_group_base = n_image_groups + n_text_groups
    for ki, kind in enumerate(("video", "audio", "document")):
        for gi in range(n_blob_groups):
            rel = f"media/{kind}{gi:03d}.bin"
            (out / rel).write_bytes(rng.randbytes(rng.randint(2048, 6144)))
            group_index = blob_group_base + ki * n_blob_groups + gi
            indices = [planned(kind, group_index, media_path=rel)
                       for _ in range(rng.randint(2, 4))]
            groups.append({"kind": kind, "plan_indices": indices})

    if len(plans) > n_messages:
        raise ValidationError(
            f"planted groups already need {len(plans)} messages, more than {n_messages}"
        )

    # singleton texts fill the remainder; sprinkle invite links over a few
    invite_links: list[str] = []
    n_singletons = n_messages - len(plans)
    for si in range(n_singletons):
        tag = f"s{si:05d}"
        text = " ".join(_word(rng, tag) for _ in range(rng.randint(8, 14)))
        if si % 400 == 7:
            token = "".join(rng.choice(_LINK_ALPHABET) for _ in range(16))
            host = "t.me/joinchat" if rng.random() < 0.5 else "telegram.me"
            url = f"https://{host}/{token}"
            invite_links.append(url)
            text = f"{text} {url}"
        planned("text", None, text=text)

    # per-chat ids follow send time, like a real export
    by_chat: dict[str, list[_PlannedMessage]] = {c.chat_id: [] for c in chats}
    for plan in plans:
        by_chat[plan.chat_id].append(plan)
    for chat_id, chat_plans in by_chat.items():
        chat_plans.sort(key=lambda p: (p.sent_at, p.media_kind, p.text or p.media_path or ""))
        for offset, plan in enumerate(chat_plans):
            plan.msg_id = 1000 + offset
        lines = []
        for plan in chat_plans:
            obj: dict = {
                "msg_id": str(plan.msg_id),
                "chat_id": chat_id,
                "sender_id": plan.sender_id,
                "sent_at": format_utc_timestamp(plan.sent_at),
                "media_kind": plan.media_kind,
            }
            if plan.text is not None:
                obj["text"] = plan.text
            if plan.media_path is not None:
                obj["media_path"] = plan.media_path
            lines.append(json.dumps(obj, ensure_ascii=False, sort_keys=True))
        (out / f"chat_{chat_id}.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")

    registry_obj = [
        {
            "chat_id": c.chat_id,
            "kind": c.kind,
            "title": c.title,
            "member_count": c.member_count,
            "joined_at": format_utc_timestamp(c.joined_at),
        }
        for c in chats
    ]
    (out / "registry.json").write_text(
        json.dumps(registry_obj, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )

    secret = f"{rng.getrandbits(128):032x}"
    (out / "secret.key").write_text(secret + "\n", encoding="utf-8")

    password = f"pw-{rng.getrandbits(40):010x}"
    digest = hash_password(password, salt=rng.randbytes(16))
    accounts = [
        {
            "username": "analyst",
            "password_digest": digest,
            "created_at": "2021-01-01T00:00:00Z",
        }
    ]
    (out / "accounts.json").write_text(
        json.dumps(accounts, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    (out / "config.ini").write_text(
        "[monitor]\n"
        "secret_file = secret.key\n"
        "accounts_file = accounts.json\n"
        "image_hamming_threshold = 10\n"
        "text_jaccard_threshold = 0.7\n"
        "cors_origin = http://localhost:5173\n"
        "bind = 127.0.0.1:8008\n"
        "public_base_url = http://localhost:8008\n"
        "token_ttl_seconds = 3600\n",
        encoding="utf-8",
    )

    manifest = {
        "seed": seed,
        "n_messages": n_messages,
        "date_range": [
            FIXTURE_START.date().isoformat(),
            (FIXTURE_START + timedelta(days=FIXTURE_DAYS - 1)).date().isoformat(),
        ],
        "chat_ids": [c.chat_id for c in chats],
        "senders": sorted(senders),
        "accounts": [{"username": "analyst", "password": password}],
        "invite_links": invite_links,
        "expected_cluster_counts": {
            "image": n_image_groups,
            "text": n_text_groups + n_singletons,
            "video": n_blob_groups,
            "audio": n_blob_groups,
            "document": n_blob_groups,
        },
        "groups": [
            {
                "kind": g["kind"],
                "members": [[plans[i].chat_id, str(plans[i].msg_id)] for i in g["plan_indices"]],
            }
            for g in groups
        ],
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return manifest
