"""Password accounts and bearer-token sessions for the query API.

Plaintext passwords are never persisted; the accounts file stores salted
PBKDF2 digests. Tokens are opaque random strings held in memory with a
configurable expiry, so access stays revocable by restart.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import secrets
import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Callable

from .models import ValidationError, parse_utc_timestamp

_PBKDF2_ITERATIONS = 200_000


class AuthError(Exception):
    """Credential or token rejection; the API maps these to 401."""

    code = "unauthorized"


class TokenExpiredError(AuthError):
    code = "token_expired"


@dataclass(frozen=True)
class Account:
    username: str
    password_digest: str
    created_at: datetime


def hash_password(password: str, *, salt: bytes | None = None, iterations: int = _PBKDF2_ITERATIONS) -> str:
    """Salted digest in the form `pbkdf2_sha256$<iterations>$<salt>$<hash>`.

    Pass `salt` only for reproducible fixtures; normal use lets it default
    to fresh random bytes.
    """
    if salt is None:
        salt = secrets.token_bytes(16)
    dk = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)
    return f"pbkdf2_sha256${iterations}${salt.hex()}${dk.hex()}"


def verify_password(password: str, digest: str) -> bool:
    """Constant-time check of a password against a stored digest."""
    try:
        scheme, iterations, salt_hex, hash_hex = digest.split("$")
        if scheme != "pbkdf2_sha256":
            return False
        dk = hashlib.pbkdf2_hmac(
            "sha256", password.encode("utf-8"), bytes.fromhex(salt_hex), int(iterations)
        )
        return hmac.compare_digest(dk.hex(), hash_hex)
    except (ValueError, TypeError):
        return False


def load_accounts(path: Path) -> dict[str, Account]:
    """Read the accounts file: a JSON array of account objects."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValidationError(f"{path}: accounts file must be a JSON array")
    accounts: dict[str, Account] = {}
    for obj in data:
        try:
            account = Account(
                username=obj["username"],
                password_digest=obj["password_digest"],
                created_at=parse_utc_timestamp(obj["created_at"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"{path}: bad account record ({exc})") from None
        if account.username in accounts:
            raise ValidationError(f"{path}: duplicate username {account.username!r}")
        accounts[account.username] = account
    return accounts


class TokenStore:
    """In-memory bearer tokens with expiry.

    The clock is injectable so expiry is testable without sleeping.
    """

    def __init__(self, ttl_seconds: int, clock: Callable[[], float] = time.monotonic):
        self.ttl_seconds = ttl_seconds
        self._clock = clock
        self._tokens: dict[str, tuple[str, float]] = {}

    def issue(self, username: str) -> str:
        token = secrets.token_hex(32)
        self._tokens[token] = (username, self._clock() + self.ttl_seconds)
        return token

    def check(self, token: str) -> str:
        """Return the username for a live token, or raise."""
        entry = self._tokens.get(token)
        if entry is None:
            raise AuthError("invalid token")
        username, expires_at = entry
        if self._clock() >= expires_at:
            del self._tokens[token]
            raise TokenExpiredError("token expired")
        return username

    def revoke(self, token: str) -> None:
        self._tokens.pop(token, None)
