"""Regenerate the committed 20-image hash test corpus.

Images are accepted one by one only while every pairwise hash distance stays
at 26 bits or more, which leaves margin for the distance-20 bound the tests
assert after lossy variants are derived. Output is deterministic for a fixed
seed; rerunning overwrites tests/data/image_corpus/ in place.
"""

from __future__ import annotations

import io
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from chatmonitor.fingerprint import hamming, phash64, phash_hex
from chatmonitor.fixture import _synth_original

CORPUS_DIR = Path(__file__).resolve().parent.parent / "tests" / "data" / "image_corpus"
N_IMAGES = 20
MIN_DISTANCE = 26
SEED = 20210301


def main() -> int:
    rng = np.random.default_rng(SEED)
    CORPUS_DIR.mkdir(parents=True, exist_ok=True)
    accepted: list[tuple[int, Image.Image]] = []
    attempts = 0
    while len(accepted) < N_IMAGES:
        attempts += 1
        if attempts > 10_000:
            print("could not curate a corpus at this separation", file=sys.stderr)
            return 1
        img = _synth_original(rng)
        h = phash64(np.asarray(img))
        if all(hamming(h, other) >= MIN_DISTANCE for other, _ in accepted):
            accepted.append((h, img))

    expected = {}
    for i, (h, img) in enumerate(accepted):
        name = f"corpus_{i:02d}.png"
        img.save(CORPUS_DIR / name, format="PNG")
        # sanity: the saved PNG decodes back to the same hash
        from chatmonitor.fingerprint import phash64_from_bytes

        buf = io.BytesIO()
        img.save(buf, format="PNG")
        assert phash64_from_bytes(buf.getvalue()) == h
        expected[name] = phash_hex(h)

    (CORPUS_DIR / "expected_hashes.json").write_text(
        json.dumps(expected, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"wrote {N_IMAGES} images after {attempts} attempts -> {CORPUS_DIR}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
