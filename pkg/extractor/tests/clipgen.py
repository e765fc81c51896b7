"""Synthetic test clip and deterministic fake encoders."""
import zlib

import cv2
import numpy as np


def write_clip(path, seconds=5, native_fps=10, size=64):
    """MJPG clip where the red channel of each frame encodes its second.

    Second ``s`` renders red = 40 + 30*s, so a sampled frame's origin
    second is recoverable from its mean red value.
    """
    writer = cv2.VideoWriter(
        str(path), cv2.VideoWriter_fourcc(*"MJPG"), native_fps, (size, size)
    )
    assert writer.isOpened()
    for frame_idx in range(seconds * native_fps):
        second = frame_idx // native_fps
        frame = np.zeros((size, size, 3), dtype=np.uint8)
        frame[:, :, 2] = 40 + 30 * second  # BGR: red channel
        frame[:, :, 1] = 60
        writer.write(frame)
    writer.release()
    return path


def second_of_frame(rgb_frame):
    """Invert the encoding above for a sampled RGB frame."""
    return int(round((float(rgb_frame[:, :, 0].mean()) - 40) / 30))


class FakeEncoder:
    """Deterministic stand-in for a model-backed encoder."""

    def __init__(self, name, dim):
        self.name = name
        self.dim = dim
        self.checkpoint = f"fake-{name}"

    def _features(self, frame):
        small = cv2.resize(frame, (4, 4)).astype(np.float64).reshape(-1)
        reps = -(-self.dim // small.size)
        return np.tile(small, reps)[: self.dim] + 1.0

    def encode_images(self, frames):
        return np.stack([self._features(f) for f in frames]).astype(np.float32)

    def encode_texts(self, texts):
        rows = []
        for text in texts:
            rng = np.random.default_rng(zlib.crc32(f"{self.name}:{text}".encode()))
            rows.append(rng.normal(size=self.dim) + 2.0)
        return np.stack(rows).astype(np.float32)
