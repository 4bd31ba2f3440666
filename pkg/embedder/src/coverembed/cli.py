"""CLI: batch-encode cover page images or a text query into RAREMB1 files."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .backends import BackendUnavailableError, load_backend
from .writer import write_vectors


def read_manifest(path: Path) -> list[tuple[str, Path]]:
    entries = json.loads(path.read_text())
    if not isinstance(entries, list) or not entries:
        raise click.ClickException(f"{path}: manifest must be a non-empty JSON array")
    parsed = []
    seen: set[str] = set()
    for entry in entries:
        item_id, image = entry.get("id"), entry.get("path")
        if not item_id or not image:
            raise click.ClickException(f"{path}: every entry needs id and path: {entry}")
        if item_id in seen:
            raise click.ClickException(f"{path}: duplicate id {item_id!r}")
        seen.add(item_id)
        parsed.append((item_id, Path(image)))
    return parsed


@click.group()
def main() -> None:
    """Encode manual cover pages and text queries into RAREMB1 vector files."""


@main.command("embed-images")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--backend", default="clip", show_default=True, type=click.Choice(["clip", "hash"]))
def embed_images(manifest_path: str, out_path: str, backend: str) -> None:
    """Encode every manifest image; one 512-dim float32 row per entry, manifest order."""
    entries = read_manifest(Path(manifest_path))

    failures = [(item_id, path) for item_id, path in entries if not path.is_file()]
    for item_id, path in failures:
        click.echo(f"error: {item_id}: image not readable: {path}", err=True)
    if failures:
        raise SystemExit(1)

    try:
        encoder = load_backend(backend)
        rows = encoder.encode_images([path for _, path in entries])
    except BackendUnavailableError as exc:
        raise click.ClickException(str(exc)) from exc
    write_vectors(Path(out_path), [item_id for item_id, _ in entries], rows)
    click.echo(f"wrote {len(entries)} x {rows.shape[1]} vectors -> {out_path}")


@main.command("embed-text")
@click.argument("query")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--backend", default="clip", show_default=True, type=click.Choice(["clip", "hash"]))
def embed_text(query: str, out_path: str, backend: str) -> None:
    """Encode one text query (e.g. "A chair assembly manual cover page")."""
    if not query.strip():
        raise click.UsageError("query must be non-empty")
    try:
        encoder = load_backend(backend)
        rows = encoder.encode_text(query)
    except BackendUnavailableError as exc:
        raise click.ClickException(str(exc)) from exc
    write_vectors(Path(out_path), ["query"], rows)
    click.echo(f"wrote 1 x {rows.shape[1]} vector -> {out_path}")


def embed_images_entry() -> None:
    main(["embed-images"] + sys.argv[1:])


def embed_text_entry() -> None:
    main(["embed-text"] + sys.argv[1:])


if __name__ == "__main__":
    main()
