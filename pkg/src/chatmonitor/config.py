"""Operator configuration: one INI file with a [monitor] section.

    [monitor]
    secret_file = secret.key          ; pseudonymization key, non-empty bytes
    image_hamming_threshold = 10
    text_jaccard_threshold = 0.7
    accounts_file = accounts.json     ; required for `serve`
    cors_origin = http://localhost:5173
    bind = 127.0.0.1:8008
    public_base_url = http://localhost:8008   ; used in reverse-search URLs
    token_ttl_seconds = 3600

Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from .cluster import ClusterThresholds
from .ingest import ConfigError


@dataclass
class MonitorConfig:
    secret: bytes
    thresholds: ClusterThresholds
    accounts_file: Path | None
    cors_origin: str
    bind: str
    public_base_url: str
    token_ttl_seconds: int


def load_config(path: Path) -> MonitorConfig:
    path = Path(path)
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    if not parser.has_section("monitor"):
        raise ConfigError(f"{path}: missing [monitor] section")
    section = parser["monitor"]
    base = path.parent

    secret_file = section.get("secret_file")
    if not secret_file:
        raise ConfigError(f"{path}: secret_file is required")
    secret_path = base / secret_file
    try:
        secret = secret_path.read_bytes().strip()
    except OSError as exc:
        raise ConfigError(f"cannot read secret file {secret_path}: {exc}") from exc
    if not secret:
        raise ConfigError(f"secret file {secret_path} is empty")

    try:
        thresholds = ClusterThresholds(
            image_hamming=section.getint("image_hamming_threshold", fallback=10),
            text_jaccard=section.getfloat("text_jaccard_threshold", fallback=0.7),
        )
        thresholds.validate()
        ttl = section.getint("token_ttl_seconds", fallback=3600)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if ttl < 1:
        raise ConfigError(f"{path}: token_ttl_seconds must be >= 1")

    accounts_file = section.get("accounts_file")
    return MonitorConfig(
        secret=secret,
        thresholds=thresholds,
        accounts_file=(base / accounts_file) if accounts_file else None,
        cors_origin=section.get("cors_origin", fallback="http://localhost:5173"),
        bind=section.get("bind", fallback="127.0.0.1:8008"),
        public_base_url=section.get("public_base_url", fallback="http://localhost:8008"),
        token_ttl_seconds=ttl,
    )
