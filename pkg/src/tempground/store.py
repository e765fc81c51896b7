"""On-disk store for per-frame video embeddings.

Layout: ``<root>/<video_id>/manifest.json`` plus one raw binary per
backend.  Binaries are headerless row-major IEEE-754 float32
little-endian; the JSON manifest is the single source of shape truth.

Embeddings are stored raw (not L2-normalized): distribution
normalization subtracts feature means from the raw vectors before
normalizing, so the raw values must be preserved.  Loaded sets are
immutable after construction and safe for concurrent reads.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict

import numpy as np

from .errors import (
    IoFailure,
    MissingManifest,
    ShapeMismatch,
    UnknownSchemaVersion,
    ZeroVectorRow,
)

SCHEMA_VERSION = 1
_DTYPE = np.dtype("<f4")


@dataclass(frozen=True)
class VideoMeta:
    """Shape and timing metadata for one video's frame embeddings.

    Frame ``k`` (zero-based) sits at ``k / fps`` seconds.
    """

    video_id: str
    num_frames: int
    duration_seconds: float
    fps: float = 1.0

    def __post_init__(self) -> None:
        if not self.video_id:
            raise ValueError("video_id must be nonempty")
        if self.num_frames < 1:
            raise ValueError("num_frames must be >= 1")
        if not self.fps > 0:
            raise ValueError("fps must be > 0")
        if self.duration_seconds < (self.num_frames - 1) / self.fps:
            raise ValueError(
                "duration_seconds %.6f shorter than last frame timestamp %.6f"
                % (self.duration_seconds, (self.num_frames - 1) / self.fps)
            )

    def timestamp(self, frame_index: int) -> float:
        """Timestamp in seconds of the given zero-based frame index."""
        return frame_index / self.fps

    def timestamps(self) -> np.ndarray:
        return np.arange(self.num_frames, dtype=np.float64) / self.fps


@dataclass(frozen=True)
class BackendMatrix:
    """N x d frame-embedding matrix for one backend (e.g. "clip")."""

    name: str
    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.ascontiguousarray(self.rows, dtype=np.float32)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise ValueError("rows must be a nonempty 2-D matrix")
        zero = np.where(~rows.any(axis=1))[0]
        if zero.size:
            raise ZeroVectorRow(
                f"backend {self.name!r}: zero embedding at row(s) {zero[:5].tolist()}"
            )
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @property
    def num_frames(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class VideoEmbeddingSet:
    """All backend matrices for one video, consistent with its metadata."""

    meta: VideoMeta
    backends: Dict[str, BackendMatrix] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.backends:
            raise ValueError("backend set must be nonempty")
        for name, matrix in self.backends.items():
            if matrix.num_frames != self.meta.num_frames:
                raise ValueError(
                    f"backend {name!r} has {matrix.num_frames} rows, "
                    f"expected {self.meta.num_frames}"
                )


def mean_embedding(matrix: BackendMatrix) -> np.ndarray:
    """Arithmetic mean of the raw (un-normalized) rows."""
    return matrix.rows.astype(np.float64).mean(axis=0)


def _video_dir(store_root: Path | str, video_id: str) -> Path:
    return Path(store_root) / video_id


def save_video_embeddings(store_root: Path | str, emb_set: VideoEmbeddingSet) -> Path:
    """Persist a set under ``store_root``; returns the manifest path.

    ``load_video_embeddings(save(x))`` is bitwise identical to ``x``.
    """
    directory = _video_dir(store_root, emb_set.meta.video_id)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "video_id": emb_set.meta.video_id,
        "fps": emb_set.meta.fps,
        "num_frames": emb_set.meta.num_frames,
        "duration_seconds": emb_set.meta.duration_seconds,
        "backends": [],
    }
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for name in sorted(emb_set.backends):
            matrix = emb_set.backends[name]
            filename = f"{name}.f32"
            (directory / filename).write_bytes(
                np.ascontiguousarray(matrix.rows, dtype=_DTYPE).tobytes()
            )
            manifest["backends"].append(
                {"name": name, "dim": matrix.dim, "dtype": "f32le", "file": filename}
            )
        manifest_path = directory / "manifest.json"
        manifest_path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"failed writing store for {emb_set.meta.video_id!r}: {exc}") from exc
    return manifest_path


def load_video_embeddings(store_root: Path | str, video_id: str) -> VideoEmbeddingSet:
    """Load and fully validate one video's embeddings."""
    directory = _video_dir(store_root, video_id)
    manifest_path = directory / "manifest.json"
    if not manifest_path.is_file():
        raise MissingManifest(f"no manifest at {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MissingManifest(f"unreadable manifest at {manifest_path}: {exc}") from exc

    version = manifest.get("schema_version")
    if version != SCHEMA_VERSION:
        raise UnknownSchemaVersion(f"schema_version {version!r} (expected {SCHEMA_VERSION})")

    meta = VideoMeta(
        video_id=manifest["video_id"],
        num_frames=int(manifest["num_frames"]),
        duration_seconds=float(manifest["duration_seconds"]),
        fps=float(manifest.get("fps", 1.0)),
    )

    backends: Dict[str, BackendMatrix] = {}
    for entry in manifest.get("backends", []):
        name = entry["name"]
        dim = int(entry["dim"])
        if entry.get("dtype", "f32le") != "f32le":
            raise UnknownSchemaVersion(f"backend {name!r}: unsupported dtype {entry.get('dtype')!r}")
        path = directory / entry["file"]
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise IoFailure(f"failed reading {path}: {exc}") from exc
        expected = meta.num_frames * dim * 4
        if len(raw) != expected:
            raise ShapeMismatch(
                f"backend {name!r}: {len(raw)} bytes, expected {expected} "
                f"({meta.num_frames} x {dim} x 4)"
            )
        rows = np.frombuffer(raw, dtype=_DTYPE).reshape(meta.num_frames, dim)
        backends[name] = BackendMatrix(name=name, rows=rows)

    if not backends:
        raise MissingManifest(f"manifest at {manifest_path} lists no backends")
    return VideoEmbeddingSet(meta=meta, backends=backends)


def list_videos(store_root: Path | str) -> list[str]:
    """Video ids that have a manifest under ``store_root``, sorted."""
    root = Path(store_root)
    if not root.is_dir():
        return []
    return sorted(p.name for p in root.iterdir() if (p / "manifest.json").is_file())
