"""Pluggable text-transform and embedding clients.

The text-transform protocol (shared by activation, decomposition,
question generation, response parsing and correction) is a single
endpoint: POST /v1/transform with {"task": ..., "inputs": {...}} and a
structured {"ok": true, "output": {...}} reply.  Implementations:

  * RuleFallbackClient  - deterministic, offline; backs CI and the
    acceptance suite
  * RemoteTransformClient - HTTP service wrapper with bounded retries
  * ReplayTranscriptClient - replays recorded outputs from a JSON file

Every implementation is total: it returns a well-formed structured
result or raises a typed error, never free text needing re-parsing.

Embedding clients produce per-backend text vectors, either from a
precomputed JSON file (offline) or the /v1/embed_text HTTP service.
"""
from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Dict, List, Protocol, Sequence, Tuple

import numpy as np
import requests

from .errors import ClientUnavailable, EmbeddingFailure
from . import events as _events
from . import parsing as _parsing


class TextTransformClient(Protocol):
    def transform(self, task: str, inputs: dict) -> dict: ...


class EmbeddingClient(Protocol):
    def embed_texts(self, texts: Sequence[str], backend: str) -> np.ndarray: ...


TASK1_QUESTION_TEMPLATE = 'When does the event "{caption}" occur in the video?'
TASK2_QUESTION_TEMPLATE = 'Did the event "{a}" occur {relation} the event "{b}"?'


class RuleFallbackClient:
    """Deterministic rule-based implementation of every transform task."""

    def transform(self, task: str, inputs: dict) -> dict:
        handler = getattr(self, f"_task_{task}", None)
        if handler is None:
            raise ClientUnavailable(f"rule fallback has no handler for task {task!r}")
        return handler(inputs)

    def _task_activate(self, inputs: dict) -> dict:
        result = _events.rule_activate(inputs["query"])
        return {
            "needs_temporal_support": result.needs_temporal_support,
            "event_texts": list(result.event_texts),
        }

    def _task_decompose(self, inputs: dict) -> dict:
        return {"actions": _events.rule_decompose(inputs["event"])}

    def _task_task1_question(self, inputs: dict) -> dict:
        return {"question": TASK1_QUESTION_TEMPLATE.format(caption=inputs["caption"])}

    def _task_task2_question(self, inputs: dict) -> dict:
        return {
            "question": TASK2_QUESTION_TEMPLATE.format(
                a=inputs["event_a"], relation=inputs["relation"], b=inputs["event_b"]
            )
        }

    def _task_parse_timestamps(self, inputs: dict) -> dict:
        ts = _parsing.parse_timestamps(inputs["response"], float(inputs["duration"]))
        return ts.to_json_dict()

    def _task_classify_order(self, inputs: dict) -> dict:
        return {"label": _parsing.classify_order(inputs["response"]).value}

    def _task_correct(self, inputs: dict) -> dict:
        # Import here: claims depends on events/parsing, not on clients.
        from .claims import Claim, GroundedAction, fallback_correct
        from .events import IconicAction
        from .scoring import RankedEntry, RankedTimestamps

        duration = float(inputs["duration"])
        grounded = tuple(
            GroundedAction(
                action=IconicAction(index=i, text=f"action {i}"),
                best=RankedTimestamps(
                    entries=(RankedEntry(frame_index=0, timestamp_seconds=float(t), total_score=0.0),)
                ),
                chosen_timestamp=float(t),
            )
            for i, t in enumerate(inputs["timestamps"])
        )
        claim = Claim(
            lines=tuple(inputs["facts"]), grounded=grounded, video_duration=duration
        )
        return {"response": fallback_correct(inputs["response"], claim, duration)}


class RemoteTransformClient:
    """HTTP client for the /v1/transform service."""

    def __init__(self, endpoint: str, timeout: float = 15.0, retries: int = 2,
                 max_in_flight: int = 8):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self._gate = threading.Semaphore(max_in_flight)

    def transform(self, task: str, inputs: dict) -> dict:
        payload = {"task": task, "inputs": inputs}
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                with self._gate:
                    reply = requests.post(
                        f"{self.endpoint}/v1/transform", json=payload, timeout=self.timeout
                    )
                reply.raise_for_status()
                body = reply.json()
            except (requests.RequestException, ValueError) as exc:
                last_error = exc
                continue
            if body.get("ok") and isinstance(body.get("output"), dict):
                return body["output"]
            raise ClientUnavailable(
                f"transform task {task!r} rejected: {body.get('error', 'malformed reply')}"
            )
        raise ClientUnavailable(f"transform task {task!r} unreachable: {last_error}")


class ReplayTranscriptClient:
    """Replays recorded transform outputs from a JSON transcript.

    Transcript format: a list of {"task": ..., "inputs": {...},
    "output": {...}} records; lookups key on the canonical JSON of
    (task, inputs).
    """

    def __init__(self, transcript_path: Path | str):
        records = json.loads(Path(transcript_path).read_text(encoding="utf-8"))
        self._by_key: Dict[str, dict] = {
            self._key(rec["task"], rec["inputs"]): rec["output"] for rec in records
        }

    @staticmethod
    def _key(task: str, inputs: dict) -> str:
        return json.dumps({"task": task, "inputs": inputs}, sort_keys=True)

    def transform(self, task: str, inputs: dict) -> dict:
        key = self._key(task, inputs)
        if key not in self._by_key:
            raise ClientUnavailable(f"no transcript entry for task {task!r}")
        return self._by_key[key]


class FileEmbeddingClient:
    """Precomputed text embeddings loaded from JSON files.

    Each file holds {"backend": ..., "texts": [...], "embeddings":
    [[...], ...]} with row order matching the text order.
    """

    def __init__(self, paths: Sequence[Path | str] = ()):
        self._vectors: Dict[Tuple[str, str], np.ndarray] = {}
        for path in paths:
            self.load(path)

    def load(self, path: Path | str) -> None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        backend = data["backend"]
        texts = data["texts"]
        rows = data["embeddings"]
        if len(texts) != len(rows):
            raise EmbeddingFailure(f"{path}: {len(texts)} texts but {len(rows)} embedding rows")
        for text, row in zip(texts, rows):
            self._vectors[(backend, text)] = np.asarray(row, dtype=np.float64)

    def add(self, backend: str, text: str, vector: np.ndarray) -> None:
        self._vectors[(backend, text)] = np.asarray(vector, dtype=np.float64)

    def embed_texts(self, texts: Sequence[str], backend: str) -> np.ndarray:
        rows: List[np.ndarray] = []
        for text in texts:
            key = (backend, text)
            if key not in self._vectors:
                raise EmbeddingFailure(f"no precomputed {backend!r} embedding for {text!r}")
            rows.append(self._vectors[key])
        return np.stack(rows)


class RemoteEmbeddingClient:
    """HTTP client for the /v1/embed_text service."""

    def __init__(self, endpoint: str, timeout: float = 30.0, retries: int = 2):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.retries = retries

    def embed_texts(self, texts: Sequence[str], backend: str) -> np.ndarray:
        if not texts:
            raise EmbeddingFailure("texts must be nonempty")
        payload = {"backend": backend, "texts": list(texts)}
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                reply = requests.post(
                    f"{self.endpoint}/v1/embed_text", json=payload, timeout=self.timeout
                )
                reply.raise_for_status()
                body = reply.json()
                rows = np.asarray(body["embeddings"], dtype=np.float64)
            except (requests.RequestException, ValueError, KeyError) as exc:
                last_error = exc
                continue
            if rows.ndim != 2 or rows.shape[0] != len(texts):
                raise EmbeddingFailure(f"embed service returned shape {rows.shape}")
            return rows
        raise EmbeddingFailure(f"embed service unreachable: {last_error}")
