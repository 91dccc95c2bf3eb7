"""Shared fixtures: a small generated corpus run through the real CLI commands."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from types import SimpleNamespace

import pytest
from click.testing import CliRunner

from chatmonitor.cli import cli
from chatmonitor.fixture import generate_fixture
from chatmonitor.models import BlobRef, RawMessage
from chatmonitor.store import load_snapshot

SMALL_SEED = 7
SMALL_SIZE = 1000

CORPUS_DIR = Path(__file__).parent / "data" / "image_corpus"


def run_cli(*args: str) -> None:
    result = CliRunner().invoke(cli, list(args), catch_exceptions=False)
    assert result.exit_code == 0, result.output


@pytest.fixture(scope="session")
def small_fixture(tmp_path_factory) -> SimpleNamespace:
    root = tmp_path_factory.mktemp("fixture-1k")
    manifest = generate_fixture(root, seed=SMALL_SEED, n_messages=SMALL_SIZE)
    return SimpleNamespace(root=root, manifest=manifest, config=root / "config.ini")


@pytest.fixture(scope="session")
def small_dataset(small_fixture, tmp_path_factory):
    """The 1000-message fixture after `monitor ingest` and `monitor process`."""
    dataset_dir = tmp_path_factory.mktemp("dataset-1k")
    run_cli("ingest", "--input", str(small_fixture.root),
            "--dataset", str(dataset_dir), "--config", str(small_fixture.config))
    run_cli("process", "--dataset", str(dataset_dir), "--config", str(small_fixture.config))
    return load_snapshot(dataset_dir)


@pytest.fixture(scope="session")
def corpus_hashes() -> dict[str, str]:
    return json.loads((CORPUS_DIR / "expected_hashes.json").read_text())


def make_message(
    msg_id: str = "1",
    chat_id: str = "c1",
    sender: str = "p" * 32,
    sent_at: datetime | None = None,
    media_kind: str = "text",
    text: str | None = "hello there friend",
    checksum: str | None = None,
) -> RawMessage:
    """Hand-rolled message for unit tests; media kinds get a synthetic ref."""
    ref = None
    if media_kind != "text":
        ref = BlobRef(checksum=checksum or "0" * 32, size_bytes=3, media_kind=media_kind)
        text = None
    return RawMessage(
        msg_id=msg_id,
        chat_id=chat_id,
        sender=sender,
        sent_at=sent_at or datetime(2021, 3, 1, 12, 0, 0, tzinfo=timezone.utc),
        media_kind=media_kind,
        text=text,
        media_ref=ref,
    )
