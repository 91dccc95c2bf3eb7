"""Operator commands: ingest exports, build clusters, scan links, serve the API.

Exit codes are a scripting contract: 0 success, 1 usage error (bad command
line), 2 data error (unreadable input, bad config, corrupt dataset). Click
prefers 2 for usage errors, so `main` re-maps instead of letting click exit.
"""

from __future__ import annotations

import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from .cluster import IntegrityError, build_clusters
from .config import load_config
from .fingerprint import FingerprintError, fingerprint_message
from .fixture import generate_fixture
from .ingest import ChatRegistry, ConfigError, extract_invite_links, parse_export
from .models import ChatRecord, ValidationError
from .store import (
    BlobCorruptError,
    Dataset,
    FingerprintFailure,
    StorageError,
    load_snapshot,
    open_or_create,
    snapshot,
)

logger = logging.getLogger(__name__)

_DATA_ERRORS = (
    ValidationError,
    ConfigError,
    StorageError,
    IntegrityError,
    FingerprintError,
    OSError,
)


@click.group()
def cli() -> None:
    """Chat-export monitoring pipeline."""
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")


@cli.command()
@click.option("--input", "input_dir", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Directory holding registry.json and *.jsonl exports.")
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(path_type=Path),
              help="Dataset directory to create or extend.")
@click.option("--config", "config_file", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
def ingest(input_dir: Path, dataset_dir: Path, config_file: Path) -> None:
    """Parse every export under --input into the dataset, storing media blobs."""
    config = load_config(config_file)
    dataset = open_or_create(dataset_dir)

    registry_path = input_dir / "registry.json"
    if registry_path.exists():
        for record in ChatRegistry.load(registry_path).records():
            dataset.registry.register(record)

    exports = sorted(input_dir.glob("*.jsonl"))
    if not exports:
        raise StorageError(f"no .jsonl export files under {input_dir}")

    file_stats = []
    new_messages = 0
    for export in exports:
        messages, report = parse_export(export, config.secret, store_blob=dataset.blobs.put)
        for message in messages:
            if dataset.registry.get(message.chat_id) is None:
                # exports may mention chats the registry never recorded
                dataset.registry.register(
                    ChatRecord(
                        chat_id=message.chat_id,
                        kind="group",
                        title=f"unlisted chat {message.chat_id}",
                        member_count=0,
                        joined_at=message.sent_at,
                    )
                )
            if dataset.add_message(message):
                new_messages += 1
        skipped = report.invalid + report.duplicates
        file_stats.append(
            {"file": export.name, "parsed": report.parsed,
             "invalid": report.invalid, "duplicates": report.duplicates}
        )
        click.echo(f"{export.name}: parsed={report.parsed} skipped={skipped}")

    dataset.ingest_stats = {
        "files": file_stats,
        "messages_total": len(dataset.messages),
        "blobs_total": dataset.blobs.count(),
    }
    snapshot(dataset)
    click.echo(
        f"ingest done: messages={len(dataset.messages)} (+{new_messages} new) "
        f"blobs={dataset.blobs.count()}"
    )


@cli.command()
@click.option("--dataset", "dataset_dir", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--config", "config_file", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
def process(dataset_dir: Path, config_file: Path) -> None:
    """Fingerprint every message, build content clusters, persist them."""
    config = load_config(config_file)
    dataset = load_snapshot(dataset_dir)

    prints = []
    failures = []
    for message in dataset.messages.values():
        payload = None
        if message.media_kind != "text":
            try:
                payload = dataset.blobs.get(message.media_ref.checksum)
            except (StorageError, BlobCorruptError) as exc:
                failures.append(FingerprintFailure(message.chat_id, message.msg_id, str(exc)))
                continue
        try:
            prints.append(fingerprint_message(message, payload))
        except FingerprintError as exc:
            failures.append(FingerprintFailure(message.chat_id, message.msg_id, str(exc)))

    dataset.clusters = build_clusters(prints, thresholds=config.thresholds)
    dataset.fingerprint_failures = failures
    snapshot(dataset)

    counts: dict[str, int] = {}
    for cluster in dataset.clusters:
        counts[cluster.kind] = counts.get(cluster.kind, 0) + 1
    for kind in sorted(counts):
        click.echo(f"{kind}: {counts[kind]} clusters")
    click.echo(f"process done: {len(dataset.clusters)} clusters, {len(failures)} failures")


@cli.command("scan-links")
@click.option("--input", "inputs", required=True, multiple=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Files to scan; repeat for several.")
def scan_links(inputs: tuple[Path, ...]) -> None:
    """Print deduplicated invite links found in the given files, one per line."""
    seen: set[str] = set()
    for path in inputs:
        text = path.read_text(encoding="utf-8", errors="replace")
        for link in extract_invite_links(text):
            if link.url not in seen:
                seen.add(link.url)
                click.echo(link.url)


@cli.command()
@click.option("--dataset", "dataset_dir", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--bind", "bind", default=None, help="host:port, defaults to the config value.")
@click.option("--config", "config_file", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
def serve(dataset_dir: Path, bind: str | None, config_file: Path) -> None:
    """Serve the HTTP API over the dataset until terminated."""
    import uvicorn

    from .api import create_app

    config = load_config(config_file)
    dataset = load_snapshot(dataset_dir)
    address = bind or config.bind
    host, _, port_text = address.rpartition(":")
    if not host or not port_text.isdigit():
        raise click.UsageError(f"--bind must look like host:port, got {address!r}")
    app = create_app(dataset, config)
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")


@cli.command("gen-fixture")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--messages", default=10_000, show_default=True, type=int)
def gen_fixture(out_dir: Path, seed: int, messages: int) -> None:
    """Generate the synthetic corpus with a ground-truth manifest."""
    started = datetime.now(timezone.utc)
    manifest = generate_fixture(out_dir, seed=seed, n_messages=messages)
    took = (datetime.now(timezone.utc) - started).total_seconds()
    click.echo(
        f"fixture: {manifest['n_messages']} messages, {len(manifest['groups'])} planted groups, "
        f"{len(manifest['chat_ids'])} chats ({took:.1f}s)"
    )


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        sys.exit(1)
    except _DATA_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    sys.exit(0)


if __name__ == "__main__":
    main()
