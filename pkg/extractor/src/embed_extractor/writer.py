"""Writer for the per-video embedding store format.

Layout: ``<root>/<video_id>/manifest.json`` plus one headerless
row-major float32 little-endian binary per backend.  The manifest is
the single source of shape truth (schema_version 1); backend entries
carry the checkpoint name as an extension field so consumers can
ignore it.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, Mapping

import numpy as np

SCHEMA_VERSION = 1
_DTYPE = np.dtype("<f4")


def write_store(
    store_root: Path | str,
    video_id: str,
    fps: float,
    duration_seconds: float,
    backend_rows: Mapping[str, np.ndarray],
    checkpoints: Mapping[str, str] | None = None,
) -> Path:
    """Persist per-backend N x d matrices; returns the manifest path."""
    if not video_id:
        raise ValueError("video_id must be nonempty")
    if not fps > 0:
        raise ValueError("fps must be > 0")
    if not backend_rows:
        raise ValueError("backend_rows must be nonempty")

    matrices: Dict[str, np.ndarray] = {}
    num_frames = None
    for name, rows in backend_rows.items():
        rows = np.ascontiguousarray(rows, dtype=_DTYPE)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise ValueError(f"backend {name!r}: rows must be a nonempty 2-D matrix")
        if not rows.any(axis=1).all():
            raise ValueError(f"backend {name!r}: zero embedding row")
        if num_frames is None:
            num_frames = rows.shape[0]
        elif rows.shape[0] != num_frames:
            raise ValueError(
                f"backend {name!r}: {rows.shape[0]} rows, expected {num_frames}"
            )
        matrices[name] = rows

    directory = Path(store_root) / video_id
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "video_id": video_id,
        "fps": fps,
        "num_frames": num_frames,
        "duration_seconds": duration_seconds,
        "backends": [],
    }
    for name in sorted(matrices):
        filename = f"{name}.f32"
        (directory / filename).write_bytes(matrices[name].tobytes())
        entry = {"name": name, "dim": int(matrices[name].shape[1]),
                 "dtype": "f32le", "file": filename}
        if checkpoints and name in checkpoints:
            entry["checkpoint"] = checkpoints[name]
        manifest["backends"].append(entry)
    manifest_path = directory / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return manifest_path


def write_text_embeddings(
    out_path: Path | str, backend: str, texts, rows: np.ndarray
) -> Path:
    """Precomputed text-embedding JSON: {"backend", "texts", "embeddings"}."""
    rows = np.asarray(rows, dtype=np.float32)
    if rows.ndim != 2 or rows.shape[0] != len(texts):
        raise ValueError(f"{rows.shape} embeddings for {len(texts)} texts")
    payload = {
        "backend": backend,
        "texts": list(texts),
        "embeddings": [[float(x) for x in row] for row in rows],
    }
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return out_path
