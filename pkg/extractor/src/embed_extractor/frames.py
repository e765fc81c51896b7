"""Frame sampling at a fixed rate via millisecond seeks.

Frame ``k`` is taken at media time ``k / fps`` seconds; the number of
sampled frames is ``ceil(duration * fps)`` so a 10-second clip at
1 FPS yields 10 rows.  Seeking avoids decoding every frame of long
videos.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import List

import cv2
import numpy as np

from .errors import DecodeFailure


def probe_duration(video_path: Path | str) -> float:
    """Container duration in seconds (frame count over native FPS)."""
    capture = cv2.VideoCapture(str(video_path))
    try:
        if not capture.isOpened():
            raise DecodeFailure(f"cannot open video {video_path}")
        native_fps = capture.get(cv2.CAP_PROP_FPS)
        frame_count = capture.get(cv2.CAP_PROP_FRAME_COUNT)
        if native_fps <= 0 or frame_count <= 0:
            raise DecodeFailure(
                f"{video_path}: container reports fps={native_fps}, frames={frame_count}"
            )
        return frame_count / native_fps
    finally:
        capture.release()


def sample_frames(video_path: Path | str, fps: float) -> List[np.ndarray]:
    """RGB uint8 frames at times 0, 1/fps, 2/fps, ... within the clip."""
    if not fps > 0:
        raise ValueError("fps must be > 0")
    duration = probe_duration(video_path)
    num_frames = math.ceil(duration * fps)
    capture = cv2.VideoCapture(str(video_path))
    try:
        frames: List[np.ndarray] = []
        for k in range(num_frames):
            capture.set(cv2.CAP_PROP_POS_MSEC, 1000.0 * k / fps)
            ok, frame = capture.read()
            if not ok:
                # Seek past the last decodable frame: reuse the final one
                # rather than fail, keeping N = ceil(duration * fps).
                if frames:
                    frames.append(frames[-1].copy())
                    continue
                raise DecodeFailure(f"{video_path}: no frame at t={k / fps:.3f}s")
            frames.append(cv2.cvtColor(frame, cv2.COLOR_BGR2RGB))
        if not frames:
            raise DecodeFailure(f"{video_path}: zero frames sampled")
        return frames
    finally:
        capture.release()
