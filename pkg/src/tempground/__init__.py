"""Temporal grounding of event queries to video frame timestamps.

Grounds decomposed "iconic action" texts against per-frame CLIP/BLIP2
embeddings, renders factual claims, rewrites responses to agree with
them, and evaluates timestamp / event-order prediction with relaxed
R@1/R@5 and accuracy metrics.
"""

from .claims import (
    Claim,
    CorrectionRequest,
    GroundedAction,
    PipelineResult,
    build_claim_for_query,
    correct_response,
    fallback_correct,
    ground_actions,
    render_claim,
)
from .clients import (
    FileEmbeddingClient,
    RemoteEmbeddingClient,
    RemoteTransformClient,
    ReplayTranscriptClient,
    RuleFallbackClient,
)
from .events import ActivationResult, IconicAction, activate, decompose
from .harness import (
    EvalReport,
    EventAnnotation,
    Relation,
    Task1Item,
    Task2Item,
    build_task1,
    build_task2,
    ingest_charades_sta,
    random_baseline_task1,
    score_task1,
    score_task2,
    temporal_iou,
)
from .parsing import (
    OrderLabel,
    TimestampSet,
    clamp_to_duration,
    classify_order,
    hits_window,
    parse_timestamps,
)
from .scoring import (
    DnConfig,
    QueryEmbedding,
    RankedTimestamps,
    TextMeanPopulation,
    cosine,
    dn_score,
    score_frames,
    score_frames_no_dn,
    top_k,
)
from .store import (
    BackendMatrix,
    VideoEmbeddingSet,
    VideoMeta,
    load_video_embeddings,
    mean_embedding,
    save_video_embeddings,
)

__version__ = "0.1.0"
