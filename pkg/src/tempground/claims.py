"""Claim construction and response correction.

Grounds each iconic action to its best-matching frame timestamp,
renders the claim (one fact line per action), assembles the corrective
prompt, and rewrites the original response so it agrees with the claim.

Claim line template:
    Fact: the event "<action>" most likely occurs at <t> seconds in
    this <L>-second video.
Timestamps and durations are printed with one decimal so claims are
byte-stable and machine-checkable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BackendMissing, EmbeddingFailure, EmptyDecomposition
from .events import ActivationResult, IconicAction, activate, decompose
from .parsing import (
    find_temporal_mentions,
    hits_window,
    is_no_info_response,
    parse_timestamps,
)
from .scoring import (
    DnConfig,
    QueryEmbedding,
    RankedTimestamps,
    score_frames,
    top_k,
)
from .store import VideoEmbeddingSet, VideoMeta

CLAIM_TEMPLATE = (
    'Fact: the event "{action}" most likely occurs at {t:.1f} seconds '
    "in this {duration:.1f}-second video."
)

CORRECTION_INSTRUCTION = (
    "Rewrite the answer so it is consistent with the Facts; change nothing else."
)


@dataclass(frozen=True)
class GroundedAction:
    """An iconic action with its full ranking and chosen timestamp."""

    action: IconicAction
    best: RankedTimestamps
    chosen_timestamp: float

    def __post_init__(self) -> None:
        if self.chosen_timestamp != self.best.entries[0].timestamp_seconds:
            raise ValueError("chosen_timestamp must be the top-ranked timestamp")


@dataclass(frozen=True)
class Claim:
    lines: Tuple[str, ...]
    grounded: Tuple[GroundedAction, ...]
    video_duration: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "grounded", tuple(self.grounded))
        if len(self.lines) != len(self.grounded):
            raise ValueError("one line per grounded action")

    @property
    def text(self) -> str:
        return "\n".join(self.lines)

    @property
    def timestamps(self) -> Tuple[float, ...]:
        return tuple(g.chosen_timestamp for g in self.grounded)


@dataclass(frozen=True)
class CorrectionRequest:
    user_query: str
    original_response: str
    claim: Claim

    def __post_init__(self) -> None:
        if not self.user_query or not self.original_response or not self.claim.lines:
            raise ValueError("query, response and claim must all be nonempty")


def ground_actions(
    video: VideoEmbeddingSet,
    actions: Sequence[IconicAction],
    embed,
    cfg: DnConfig,
    backends: Optional[Sequence[str]] = None,
) -> List[GroundedAction]:
    """Ground each action to its best frame, preserving action order.

    ``embed`` produces per-backend text vectors (``embed_texts(texts,
    backend) -> ndarray``).  The text-side DN mean is taken over all
    action embeddings of this call.
    """
    if not actions:
        raise ValueError("actions must be nonempty")
    names = sorted(backends) if backends is not None else sorted(video.backends)
    for name in names:
        if name not in video.backends:
            raise BackendMissing(f"video {video.meta.video_id!r} has no backend {name!r}")

    texts = [a.text for a in actions]
    per_backend_rows: Dict[str, np.ndarray] = {}
    text_means: Dict[str, np.ndarray] = {}
    for name in names:
        rows = np.asarray(embed.embed_texts(texts, name), dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] != len(texts):
            raise EmbeddingFailure(
                f"backend {name!r}: expected {len(texts)} embedding rows, got shape {rows.shape}"
            )
        if rows.shape[1] != video.backends[name].dim:
            raise EmbeddingFailure(
                f"backend {name!r}: text dim {rows.shape[1]} != store dim {video.backends[name].dim}"
            )
        per_backend_rows[name] = rows
        text_means[name] = rows.mean(axis=0)

    grounded: List[GroundedAction] = []
    for i, action in enumerate(actions):
        query = QueryEmbedding(
            action_text=action.text,
            per_backend={name: per_backend_rows[name][i] for name in names},
        )
        ranking = score_frames(video, query, cfg, text_means=text_means)
        grounded.append(
            GroundedAction(
                action=action,
                best=ranking,
                chosen_timestamp=ranking.entries[0].timestamp_seconds,
            )
        )
    return grounded


def render_claim(grounded: Sequence[GroundedAction], meta: VideoMeta) -> Claim:
    """Deterministic claim text, one fact line per action."""
    if not grounded:
        raise ValueError("grounded actions must be nonempty")
    lines = tuple(
        CLAIM_TEMPLATE.format(
            action=g.action.text, t=g.chosen_timestamp, duration=meta.duration_seconds
        )
        for g in grounded
    )
    return Claim(lines=lines, grounded=tuple(grounded), video_duration=meta.duration_seconds)


def build_correction_prompt(req: CorrectionRequest) -> str:
    """Four labeled blocks: question, original answer, facts, instruction."""
    return (
        f"Question: {req.user_query}\n"
        f"Original answer: {req.original_response}\n"
        f"Facts:\n{req.claim.text}\n"
        f"Instruction: {CORRECTION_INSTRUCTION}"
    )


def _claim_phrase(timestamps: Sequence[float]) -> str:
    return "at " + ", ".join(f"{t:.1f} seconds" for t in timestamps)


def fallback_correct(original_response: str, claim: Claim, duration: float) -> str:
    """Rule-based rewrite used when no LLM is reachable.

    Temporal statements in the original are replaced by the claim's
    timestamps; responses with no temporal content get the claim facts
    appended (or substituted outright for pure no-information answers).
    Idempotent: a consistent response comes back unchanged.
    """
    mentions = find_temporal_mentions(original_response, duration)
    parsed = parse_timestamps(original_response, duration)
    targets = claim.timestamps

    if parsed.is_empty:
        if is_no_info_response(original_response):
            return " ".join(claim.lines)
        return original_response.rstrip() + " " + " ".join(claim.lines)

    if all(hits_window(parsed, t, t) for t in targets):
        return original_response

    phrase = _claim_phrase(targets)
    corrected = original_response
    for mention in sorted(mentions, key=lambda m: m.span, reverse=True):
        lo, hi = mention.span
        corrected = corrected[:lo] + phrase + corrected[hi:]
    return corrected


def correct_response(req: CorrectionRequest, client) -> str:
    """Obtain the corrected response through a transform client."""
    output = client.transform(
        "correct",
        {
            "question": req.user_query,
            "response": req.original_response,
            "facts": list(req.claim.lines),
            "timestamps": list(req.claim.timestamps),
            "duration": req.claim.video_duration,
        },
    )
    corrected = str(output.get("response", "")).strip()
    if not corrected:
        raise EmptyDecomposition("correction client returned an empty response")
    return corrected


@dataclass(frozen=True)
class PipelineResult:
    """Outcome of running activation -> decomposition -> grounding."""

    activation: ActivationResult
    actions: Tuple[IconicAction, ...]
    grounded: Tuple[GroundedAction, ...]
    claim: Optional[Claim]


def build_claim_for_query(
    video: VideoEmbeddingSet,
    query: str,
    transform_client,
    embed_client,
    cfg: DnConfig,
    backends: Optional[Sequence[str]] = None,
    require_activation: bool = True,
) -> PipelineResult:
    """End-to-end claim construction for one query against one video.

    When activation decides no temporal support is needed the result
    carries no claim (callers pass the original response through).
    With ``require_activation=False`` the raw query doubles as the
    event text if activation extracts none.
    """
    activation = activate(query, transform_client)
    event_texts = list(activation.event_texts)
    if not activation.needs_temporal_support:
        if require_activation:
            return PipelineResult(activation, (), (), None)
        event_texts = [query.strip()]
    elif not event_texts:
        event_texts = [query.strip()]

    actions: List[IconicAction] = []
    for event_text in event_texts:
        try:
            decomposed = decompose(event_text, transform_client)
        except EmptyDecomposition:
            decomposed = [IconicAction(index=0, text=event_text)]
        actions.extend(decomposed)
    actions = [IconicAction(index=i, text=a.text) for i, a in enumerate(actions)]

    grounded = ground_actions(video, actions, embed_client, cfg, backends=backends)
    claim = render_claim(grounded, video.meta)
    return PipelineResult(activation, tuple(actions), tuple(grounded), claim)


def top5_for_result(result: PipelineResult) -> List[float]:
    """Pooled top-5 timestamps across the grounded actions.

    Actions are interleaved by rank so the first entry is always the
    first action's top choice.
    """
    pools = [top_k(g.best, 5) for g in result.grounded]
    merged: List[float] = []
    for rank in range(5):
        for pool in pools:
            if rank < len(pool) and pool[rank] not in merged:
                merged.append(pool[rank])
    return merged[:5]
