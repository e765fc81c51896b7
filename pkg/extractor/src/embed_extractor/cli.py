"""Command-line surface: extract a video, or embed a list of texts."""
from __future__ import annotations

import sys
from pathlib import Path

import click

from .encoders import build_encoder
from .errors import ExtractorError
from .extract import ExtractionJob, extract
from .writer import write_text_embeddings

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_MODEL = 3


@click.group()
def main() -> None:
    """Frame sampling and embedding extraction for the video store."""


@main.command("extract")
@click.option("--video", type=click.Path(exists=True), required=True)
@click.option("--video-id", required=True)
@click.option("--fps", type=float, default=1.0, show_default=True)
@click.option("--backends", default="clip,blip2", show_default=True,
              help="Comma-separated backend names.")
@click.option("--out", type=click.Path(), required=True, help="Store root directory.")
def cmd_extract(video, video_id, fps, backends, out):
    """Sample frames and write one video's embedding store."""
    names = [b.strip() for b in backends.split(",") if b.strip()]
    try:
        job = ExtractionJob(
            video_path=Path(video), video_id=video_id, store_root=Path(out),
            fps=fps, backends=tuple(names),
        )
    except ValueError as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    try:
        manifest = extract(job)
    except ExtractorError as exc:
        click.echo(f"extraction failed: {exc}", err=True)
        sys.exit(EXIT_MODEL)
    click.echo(str(manifest))
    sys.exit(EXIT_OK)


@main.command("embed-texts")
@click.option("--backend", required=True)
@click.option("--texts-file", type=click.Path(exists=True), required=True,
              help="One text per line.")
@click.option("--checkpoint", default=None)
@click.option("--out", type=click.Path(), required=True, help="Output JSON path.")
def cmd_embed_texts(backend, texts_file, checkpoint, out):
    """Embed texts and write the precomputed-embedding JSON format."""
    texts = [line for line in Path(texts_file).read_text(encoding="utf-8").splitlines()
             if line.strip()]
    if not texts:
        click.echo("texts file is empty", err=True)
        sys.exit(EXIT_INPUT)
    try:
        encoder = build_encoder(backend, checkpoint)
        rows = encoder.encode_texts(texts)
    except ExtractorError as exc:
        click.echo(f"embedding failed: {exc}", err=True)
        sys.exit(EXIT_MODEL)
    path = write_text_embeddings(out, backend, texts, rows)
    click.echo(str(path))
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
