"""End-to-end extraction: sample frames, embed, write the store."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .encoders import ImageTextEncoder, build_encoder
from .frames import probe_duration, sample_frames
from .writer import write_store


@dataclass(frozen=True)
class ExtractionJob:
    video_path: Path
    video_id: str
    store_root: Path
    fps: float = 1.0
    backends: Sequence[str] = ("clip", "blip2")

    def __post_init__(self) -> None:
        if not self.video_id:
            raise ValueError("video_id must be nonempty")
        if not self.fps > 0:
            raise ValueError("fps must be > 0")
        if not self.backends:
            raise ValueError("at least one backend required")


def extract(
    job: ExtractionJob,
    encoders: Mapping[str, ImageTextEncoder] | None = None,
) -> Path:
    """Run one job; returns the manifest path.

    ``encoders`` overrides the default model-backed encoders (tests
    inject deterministic fakes here).
    """
    duration = probe_duration(job.video_path)
    frames = sample_frames(job.video_path, job.fps)
    backend_rows = {}
    checkpoints = {}
    for name in job.backends:
        encoder = encoders[name] if encoders else build_encoder(name)
        backend_rows[name] = encoder.encode_images(frames)
        checkpoints[name] = encoder.checkpoint
    return write_store(
        job.store_root,
        job.video_id,
        fps=job.fps,
        duration_seconds=duration,
        backend_rows=backend_rows,
        checkpoints=checkpoints,
    )
