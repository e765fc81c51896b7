"""Frame scoring for iconic-action texts.

Per frame, the total match score is the sum of per-backend cosine
similarities plus a distribution-normalized cosine computed on the
"clip"-labeled backend: cosines of the frame and text vectors after each
has had ``lambda`` times its population mean subtracted.  The top-ranked
frame's timestamp is the predicted occurrence time.

All functions here are pure over immutable inputs; callers may score
many (video, query) pairs in parallel with no coordination.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BackendMissing, DegenerateShift, ZeroVector
from .store import BackendMatrix, VideoEmbeddingSet, mean_embedding

CLIP_BACKEND = "clip"


class TextMeanPopulation(Enum):
    """Which population the text-side mean is taken over."""

    CURRENT_QUERY_ACTIONS = "current_query_actions"
    SINGLE_TEXT = "single_text"


@dataclass(frozen=True)
class DnConfig:
    """Distribution-normalization settings.

    ``lam`` scales the subtracted means; 0.25 is the published default.
    With SINGLE_TEXT the text mean is the query vector itself, which
    reduces to scaling one cosine argument by (1 - lam) and is a no-op.
    """

    lam: float = 0.25
    text_mean_population: TextMeanPopulation = TextMeanPopulation.CURRENT_QUERY_ACTIONS

    def __post_init__(self) -> None:
        if not (0.0 <= self.lam < 1.0):
            raise ValueError("lambda must satisfy 0 <= lambda < 1")


@dataclass(frozen=True)
class QueryEmbedding:
    """Per-backend text embeddings for one iconic-action text."""

    action_text: str
    per_backend: Dict[str, np.ndarray]

    def __post_init__(self) -> None:
        if not self.per_backend:
            raise ValueError("per_backend must be nonempty")
        fixed = {}
        for name, vec in self.per_backend.items():
            arr = np.asarray(vec, dtype=np.float64).reshape(-1)
            if not arr.any():
                raise ZeroVector(f"query embedding for backend {name!r} is zero")
            arr.flags.writeable = False
            fixed[name] = arr
        object.__setattr__(self, "per_backend", fixed)


@dataclass(frozen=True)
class RankedEntry:
    frame_index: int
    timestamp_seconds: float
    total_score: float


@dataclass(frozen=True)
class RankedTimestamps:
    """Frames ordered by descending score; ties broken by earlier frame."""

    entries: Tuple[RankedEntry, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        scores = [e.total_score for e in self.entries]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError("scores must be non-increasing")
        indices = [e.frame_index for e in self.entries]
        if len(set(indices)) != len(indices):
            raise ValueError("frame indices must be distinct")

    @property
    def top1(self) -> RankedEntry:
        return self.entries[0]


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two nonzero vectors, in [-1, 1]."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine undefined for zero vectors")
    return float(np.dot(a, b) / (na * nb))


def dn_score(
    frame: np.ndarray,
    frame_mean: np.ndarray,
    text: np.ndarray,
    text_mean: np.ndarray,
    cfg: DnConfig,
) -> float:
    """Cosine of the two mean-shifted vectors."""
    frame = np.asarray(frame, dtype=np.float64).reshape(-1)
    text = np.asarray(text, dtype=np.float64).reshape(-1)
    shifted_frame = frame - cfg.lam * np.asarray(frame_mean, dtype=np.float64).reshape(-1)
    shifted_text = text - cfg.lam * np.asarray(text_mean, dtype=np.float64).reshape(-1)
    if not shifted_frame.any() or not shifted_text.any():
        raise DegenerateShift("mean-shifted vector is zero; inputs are degenerate")
    return cosine(shifted_frame, shifted_text)


def _row_cosines(rows: np.ndarray, q: np.ndarray) -> np.ndarray:
    rows = rows.astype(np.float64, copy=False)
    norms = np.linalg.norm(rows, axis=1)
    qn = np.linalg.norm(q)
    if qn == 0.0:
        raise ZeroVector("query vector is zero")
    if np.any(norms == 0.0):
        raise ZeroVector("frame embedding row is zero")
    return (rows @ q) / (norms * qn)


def _zscore(scores: np.ndarray) -> np.ndarray:
    std = scores.std()
    if std == 0.0:
        return np.zeros_like(scores)
    return (scores - scores.mean()) / std


def _rank(totals: np.ndarray, video: VideoEmbeddingSet) -> RankedTimestamps:
    order = sorted(range(len(totals)), key=lambda k: (-totals[k], k))
    entries = tuple(
        RankedEntry(
            frame_index=k,
            timestamp_seconds=video.meta.timestamp(k),
            total_score=float(totals[k]),
        )
        for k in order
    )
    return RankedTimestamps(entries=entries)


def _backend_rows(video: VideoEmbeddingSet, name: str) -> BackendMatrix:
    try:
        return video.backends[name]
    except KeyError:
        raise BackendMissing(f"video {video.meta.video_id!r} has no backend {name!r}") from None


def _dn_row_scores(
    video: VideoEmbeddingSet,
    query: QueryEmbedding,
    cfg: DnConfig,
    text_means: Optional[Dict[str, np.ndarray]],
) -> np.ndarray:
    matrix = _backend_rows(video, CLIP_BACKEND)
    q = query.per_backend[CLIP_BACKEND]
    mu_frames = mean_embedding(matrix)
    if (
        cfg.text_mean_population is TextMeanPopulation.SINGLE_TEXT
        or text_means is None
        or CLIP_BACKEND not in text_means
    ):
        mu_text = q
    else:
        mu_text = np.asarray(text_means[CLIP_BACKEND], dtype=np.float64).reshape(-1)
    shifted_rows = matrix.rows.astype(np.float64) - cfg.lam * mu_frames
    shifted_q = q - cfg.lam * mu_text
    row_norms = np.linalg.norm(shifted_rows, axis=1)
    q_norm = np.linalg.norm(shifted_q)
    if q_norm == 0.0 or np.any(row_norms == 0.0):
        raise DegenerateShift("mean-shifted vector is zero; inputs are degenerate")
    return (shifted_rows @ shifted_q) / (row_norms * q_norm)


def score_frames(
    video: VideoEmbeddingSet,
    query: QueryEmbedding,
    cfg: DnConfig,
    text_means: Optional[Dict[str, np.ndarray]] = None,
    zscore: bool = False,
) -> RankedTimestamps:
    """Full descending ranking of frames by ensemble score plus DN.

    ``text_means`` supplies the per-backend mean over all iconic-action
    embeddings of the current query (only "clip" is consumed); when
    absent or under the SINGLE_TEXT policy the query vector itself is
    used, which leaves the cosine unchanged.
    """
    components: List[np.ndarray] = []
    for name in sorted(query.per_backend):
        matrix = _backend_rows(video, name)
        components.append(_row_cosines(matrix.rows, query.per_backend[name]))
    if CLIP_BACKEND in query.per_backend:
        components.append(_dn_row_scores(video, query, cfg, text_means))
    if zscore:
        components = [_zscore(c) for c in components]
    return _rank(np.sum(components, axis=0), video)


def score_frames_no_dn(
    video: VideoEmbeddingSet,
    query: QueryEmbedding,
    zscore: bool = False,
) -> RankedTimestamps:
    """Ranking from the plain cosine ensemble, without the DN term."""
    components: List[np.ndarray] = []
    for name in sorted(query.per_backend):
        matrix = _backend_rows(video, name)
        components.append(_row_cosines(matrix.rows, query.per_backend[name]))
    if zscore:
        components = [_zscore(c) for c in components]
    return _rank(np.sum(components, axis=0), video)


def top_k(ranking: RankedTimestamps, k: int) -> List[float]:
    """First ``min(k, N)`` timestamps of the ranking."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return [e.timestamp_seconds for e in ranking.entries[:k]]
