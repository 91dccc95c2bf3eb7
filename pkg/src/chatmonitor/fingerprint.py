"""Content identities: image perceptual hash, byte checksums, text shingles.

Every function here is pure and deterministic, so identical content always
maps to identical fingerprints no matter when or where it is processed.

The 64-bit image hash is the DCT construction:

1. grayscale via luma ``0.299*R + 0.587*G + 0.114*B``;
2. bilinear resize to 32x32 with corner-aligned sampling: output pixel
   ``(i, j)`` samples the source at ``y = i*(H-1)/(31)``, ``x = j*(W-1)/(31)``
   and interpolates the four surrounding pixels with weights
   ``(1-fy)(1-fx), (1-fy)fx, fy(1-fx), fy*fx`` where ``fy, fx`` are the
   fractional parts (a source axis of length 1 pins the coordinate to 0);
3. 2-D DCT-II over the 32x32 grid (separable, unnormalized:
   ``C[u,v] = 4 * sum_{x,y} p[y,x] cos(pi*u*(2y+1)/64) cos(pi*v*(2x+1)/64)``);
4. keep the top-left 8x8 coefficient block;
5. threshold at the mean of those 64 coefficients excluding the DC term;
6. scan the block row-major: the DC position contributes a fixed 0 bit, every
   other position contributes 1 iff its coefficient is strictly above the
   mean. Bits are packed most-significant-first in scan order.

A constant-color image therefore hashes to exactly 0.
"""

from __future__ import annotations

import hashlib
import io
import unicodedata
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy.fft import dct

from .models import RawMessage

PHASH_GRID = 32
PHASH_BLOCK = 8

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_JPEG_MAGIC = b"\xff\xd8\xff"


class FingerprintError(Exception):
    """Raised when content cannot be fingerprinted (e.g. undecodable image)."""


def luma(pixels: np.ndarray) -> np.ndarray:
    """Collapse an (H, W, 3) RGB grid to (H, W) float64 luma; pass 2-D through."""
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim == 2:
        return arr
    if arr.ndim == 3 and arr.shape[2] == 3:
        return 0.299 * arr[..., 0] + 0.587 * arr[..., 1] + 0.114 * arr[..., 2]
    raise FingerprintError(f"expected an RGB or grayscale pixel grid, got shape {arr.shape}")


def bilinear_resize(gray: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Corner-aligned bilinear resize of a 2-D float grid (see module docs)."""
    h, w = gray.shape
    ys = np.linspace(0.0, h - 1, out_h) if out_h > 1 and h > 1 else np.zeros(out_h)
    xs = np.linspace(0.0, w - 1, out_w) if out_w > 1 and w > 1 else np.zeros(out_w)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    top = gray[np.ix_(y0, x0)] * (1 - fx) + gray[np.ix_(y0, x1)] * fx
    bottom = gray[np.ix_(y1, x0)] * (1 - fx) + gray[np.ix_(y1, x1)] * fx
    return top * (1 - fy) + bottom * fy


def phash64(pixels: np.ndarray) -> int:
    """64-bit perceptual hash of a decoded pixel grid (>= 1 pixel)."""
    gray = luma(pixels)
    if gray.size == 0:
        raise FingerprintError("image has no pixels")
    # A constant grid has exactly-zero AC terms, so no bit can clear the strict
    # threshold; evaluate that closed form directly rather than letting float
    # round-off in the transform invent noise bits.
    if np.all(gray == gray.flat[0]):
        return 0
    small = bilinear_resize(gray, PHASH_GRID, PHASH_GRID)
    coeffs = dct(dct(small, axis=0), axis=1)
    block = coeffs[:PHASH_BLOCK, :PHASH_BLOCK]
    mean = (block.sum() - block[0, 0]) / (PHASH_BLOCK * PHASH_BLOCK - 1)
    flat = block.reshape(-1)
    bits = 0
    for i in range(1, flat.size):
        if flat[i] > mean:
            bits |= 1 << (63 - i)
    return bits


def decode_image(payload: bytes) -> np.ndarray:
    """Decode a PNG or JPEG payload to a pixel grid.

    Other formats and undecodable payloads raise FingerprintError; callers
    record a fingerprint failure and keep the message out of image clustering.
    """
    if not payload.startswith(_PNG_MAGIC) and not payload.startswith(_JPEG_MAGIC):
        raise FingerprintError("unsupported image format (only PNG and JPEG are accepted)")
    try:
        img = Image.open(io.BytesIO(payload))
        img.load()
    except Exception as exc:
        raise FingerprintError(f"undecodable image: {exc}") from None
    if img.mode == "L":
        return np.asarray(img)
    if img.mode != "RGB":
        img = img.convert("RGB")
    return np.asarray(img)


def phash64_from_bytes(payload: bytes) -> int:
    return phash64(decode_image(payload))


def phash_hex(bits: int) -> str:
    return f"{bits:016x}"


def hamming(a: int, b: int) -> int:
    """Number of differing bit positions between two 64-bit hashes."""
    return bin((a ^ b) & 0xFFFFFFFFFFFFFFFF).count("1")


def checksum128(payload: bytes) -> str:
    """MD5 digest of the payload bytes as 32 lowercase hex chars."""
    return hashlib.md5(payload).hexdigest()


def normalize_text(text: str) -> str:
    """Unicode NFC, lowercase, punctuation/symbols to spaces, whitespace collapsed.

    "Punctuation" is every character in Unicode categories P* and S*, which
    keeps tokenization deterministic for Portuguese text with emoji.
    """
    normalized = unicodedata.normalize("NFC", text).lower()
    cleaned = "".join(
        " " if unicodedata.category(ch)[0] in ("P", "S") else ch for ch in normalized
    )
    return " ".join(cleaned.split())


def text_shingles(text: str) -> frozenset[str]:
    """Word 3-gram shingle set of the normalized text.

    Messages with fewer than three tokens fall back to their token set; empty
    or whitespace-only text yields the empty set.
    """
    tokens = normalize_text(text).split()
    if not tokens:
        return frozenset()
    if len(tokens) < 3:
        return frozenset(tokens)
    return frozenset(" ".join(tokens[i : i + 3]) for i in range(len(tokens) - 2))


def jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    """|a & b| / |a | b|, defined as 1.0 when both sets are empty."""
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


@dataclass(frozen=True)
class MessagePrint:
    """A message joined with the fingerprint for its media kind.

    Exactly one identity field is set: `phash` for images, `checksum` for
    audio/video/documents, `shingles` (+ `norm_text`) for text.
    """

    message: RawMessage
    phash: int | None = None
    checksum: str | None = None
    shingles: frozenset[str] | None = None
    norm_text: str | None = None

    @property
    def fingerprint_hex(self) -> str:
        """Fixed-width lowercase hex identity used for stable cluster ids."""
        if self.phash is not None:
            return phash_hex(self.phash)
        if self.checksum is not None:
            return self.checksum
        assert self.norm_text is not None
        return hashlib.md5(self.norm_text.encode("utf-8")).hexdigest()


def fingerprint_message(message: RawMessage, payload: bytes | None) -> MessagePrint:
    """Compute the kind-appropriate fingerprint for one message.

    `payload` carries the media bytes for non-text kinds and is ignored for
    text. Raises FingerprintError for undecodable images.
    """
    if message.media_kind == "text":
        text = message.text or ""
        return MessagePrint(
            message=message,
            shingles=text_shingles(text),
            norm_text=normalize_text(text),
        )
    if payload is None:
        raise FingerprintError(f"no payload for media message {message.key}")
    if message.media_kind == "image":
        return MessagePrint(message=message, phash=phash64_from_bytes(payload))
    return MessagePrint(message=message, checksum=checksum128(payload))
