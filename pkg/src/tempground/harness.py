"""Two-task evaluation harness over temporally annotated captions.

Task 1: timestamp prediction, scored with the relaxed metric (a
response is correct when some parsed timestamp lands inside the
annotated [start, end] window); R@1 uses the top-ranked timestamp,
R@5 any of the top five.  Task 2: event-order prediction, scored as
plain label accuracy with NoInfo always counting as incorrect.

Question sampling is deterministic: RNG streams split per video so the
item list is independent of grouping order.
"""
from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    ClientUnavailable,
    MissingResponse,
    NoEligiblePairs,
    NoValidLines,
    UnknownDuration,
    VideoMismatch,
)
from .parsing import OrderLabel, classify_order, clamp_to_duration, hits_window, parse_timestamps

logger = logging.getLogger(__name__)

TASK1_QUESTION_TEMPLATE = 'When does the event "{caption}" occur in the video?'
TASK2_QUESTION_TEMPLATE = 'Did the event "{a}" occur {relation} the event "{b}"?'


class Relation(Enum):
    BEFORE = "before"
    AFTER = "after"


@dataclass(frozen=True)
class EventAnnotation:
    video_id: str
    t_start: float
    t_end: float
    caption: str

    def __post_init__(self) -> None:
        if not self.video_id:
            raise ValueError("video_id must be nonempty")
        if not (0 <= self.t_start < self.t_end):
            raise ValueError(f"bad window [{self.t_start}, {self.t_end}]")
        if not self.caption.strip():
            raise ValueError("caption must be nonempty")


@dataclass(frozen=True)
class Task1Item:
    annotation: EventAnnotation
    question: str


@dataclass(frozen=True)
class Task2Item:
    video_id: str
    event_a: EventAnnotation
    event_b: EventAnnotation
    relation: Relation
    question: str
    gt_label: OrderLabel

    def __post_init__(self) -> None:
        if self.gt_label not in (OrderLabel.YES, OrderLabel.NO):
            raise ValueError("ground truth is Yes or No only")


@dataclass
class EvalReport:
    task: str
    n_items: int
    r1_acc: Optional[float] = None
    r5_acc: Optional[float] = None
    acc: Optional[float] = None
    items_path: Optional[Path] = None

    def __post_init__(self) -> None:
        for value in (self.r1_acc, self.r5_acc, self.acc):
            if value is not None and not (0.0 <= value <= 100.0):
                raise ValueError("accuracies are percentages in [0, 100]")


def ingest_charades_sta(path: Path | str) -> List[EventAnnotation]:
    """Parse a Charades-STA style annotation file.

    Line format: ``<video_id> <start> <end>##<sentence>``.  Malformed
    lines are logged with their line number and skipped.
    """
    annotations: List[EventAnnotation] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                head, caption = line.split("##", 1)
                video_id, start, end = head.split()
                annotations.append(
                    EventAnnotation(
                        video_id=video_id,
                        t_start=float(start),
                        t_end=float(end),
                        caption=caption.strip(),
                    )
                )
            except ValueError as exc:
                logger.warning("line %d skipped: %s (%s)", lineno, line[:60], exc)
    if not annotations:
        raise NoValidLines(f"no valid annotation lines in {path}")
    return annotations


def temporal_iou(a: EventAnnotation, b: EventAnnotation) -> float:
    """Intersection over union of the two closed annotation intervals."""
    if a.video_id != b.video_id:
        raise VideoMismatch(f"{a.video_id!r} vs {b.video_id!r}")
    inter = max(0.0, min(a.t_end, b.t_end) - max(a.t_start, b.t_start))
    union = (a.t_end - a.t_start) + (b.t_end - b.t_start) - inter
    return inter / union if union > 0 else 0.0


def build_task1(annotations: Sequence[EventAnnotation], client=None) -> List[Task1Item]:
    """One question per annotation; template fallback when no client."""
    if not annotations:
        raise ValueError("annotations must be nonempty")
    items: List[Task1Item] = []
    for annotation in annotations:
        question = None
        if client is not None:
            try:
                question = client.transform("task1_question", {"caption": annotation.caption})["question"]
            except ClientUnavailable:
                question = None
        if not question:
            question = TASK1_QUESTION_TEMPLATE.format(caption=annotation.caption)
        items.append(Task1Item(annotation=annotation, question=question))
    return items


def build_task2(
    annotations: Sequence[EventAnnotation],
    seed: int,
    max_per_video: int = 2,
    client=None,
) -> List[Task2Item]:
    """Sample order-prediction pairs with temporal IoU < 0.5.

    Pure function of (annotations, seed, max_per_video): videos are
    visited in sorted order and each gets its own RNG stream.  Pairs
    with equal start times are skipped; relation is drawn uniformly and
    the ground truth follows from start-time ordering.
    """
    groups: Dict[str, List[EventAnnotation]] = {}
    for annotation in annotations:
        groups.setdefault(annotation.video_id, []).append(annotation)

    items: List[Task2Item] = []
    for video_id in sorted(groups):
        events = groups[video_id]
        rng = random.Random(f"{seed}:{video_id}")
        candidates = [
            (i, j)
            for i in range(len(events))
            for j in range(i + 1, len(events))
            if temporal_iou(events[i], events[j]) < 0.5
            and events[i].t_start != events[j].t_start
        ]
        rng.shuffle(candidates)
        for i, j in candidates[:max_per_video]:
            a, b = events[i], events[j]
            if rng.random() < 0.5:
                a, b = b, a
            relation = Relation.BEFORE if rng.random() < 0.5 else Relation.AFTER
            a_first = a.t_start < b.t_start
            correct = a_first if relation is Relation.BEFORE else not a_first
            gt_label = OrderLabel.YES if correct else OrderLabel.NO
            question = None
            if client is not None:
                try:
                    question = client.transform(
                        "task2_question",
                        {"event_a": a.caption, "event_b": b.caption, "relation": relation.value},
                    )["question"]
                except ClientUnavailable:
                    question = None
            if not question:
                question = TASK2_QUESTION_TEMPLATE.format(
                    a=a.caption, relation=relation.value, b=b.caption
                )
            items.append(
                Task2Item(
                    video_id=video_id,
                    event_a=a,
                    event_b=b,
                    relation=relation,
                    question=question,
                    gt_label=gt_label,
                )
            )
    if not items:
        raise NoEligiblePairs("no pair passed the IoU / distinct-start filters")
    return items


def _durations_from_items(annotations: Sequence[EventAnnotation]) -> Dict[str, float]:
    durations: Dict[str, float] = {}
    for a in annotations:
        durations[a.video_id] = max(durations.get(a.video_id, 0.0), a.t_end)
    return durations


def score_task1(
    items: Sequence[Task1Item],
    responses: Optional[Sequence[str]] = None,
    top_k_predictions: Optional[Sequence[Sequence[float]]] = None,
    durations: Optional[Dict[str, float]] = None,
) -> Tuple[EvalReport, List[dict]]:
    """Score Task 1 items.

    Pipeline mode (``top_k_predictions``) reports R@1/R@5 from ranked
    timestamps.  Free-text mode parses each response and reports a
    single accuracy, as a baseline MLLM is scored.
    """
    if top_k_predictions is None and responses is None:
        raise MissingResponse("provide responses or top-k predictions")
    if responses is not None and len(responses) != len(items):
        raise MissingResponse(f"{len(responses)} responses for {len(items)} items")
    if top_k_predictions is not None and len(top_k_predictions) != len(items):
        raise MissingResponse(f"{len(top_k_predictions)} predictions for {len(items)} items")
    if durations is None:
        durations = _durations_from_items([it.annotation for it in items])

    records: List[dict] = []
    r1_hits = r5_hits = 0
    for idx, item in enumerate(items):
        annotation = item.annotation
        window = (annotation.t_start, annotation.t_end)
        response = responses[idx] if responses is not None else ""
        if top_k_predictions is not None:
            preds = list(top_k_predictions[idx])[:5]
            r1 = bool(preds) and window[0] <= preds[0] <= window[1]
            r5 = any(window[0] <= t <= window[1] for t in preds)
        else:
            if response is None:
                raise MissingResponse(f"item {idx} has no response")
            duration = durations.get(annotation.video_id, annotation.t_end)
            parsed = clamp_to_duration(parse_timestamps(response, duration), duration)
            hit = hits_window(parsed, *window)
            preds, r1, r5 = [], hit, hit
        r1_hits += r1
        r5_hits += r5
        records.append(
            {
                "video_id": annotation.video_id,
                "caption": annotation.caption,
                "question": item.question,
                "gt_start": annotation.t_start,
                "gt_end": annotation.t_end,
                "pred_top5": preds,
                "response": response,
                "r1": bool(r1),
                "r5": bool(r5),
            }
        )

    n = len(items)
    if top_k_predictions is not None:
        report = EvalReport(
            task="task1", n_items=n, r1_acc=100.0 * r1_hits / n, r5_acc=100.0 * r5_hits / n
        )
    else:
        report = EvalReport(task="task1", n_items=n, acc=100.0 * r1_hits / n)
    return report, records


def score_task2(
    items: Sequence[Task2Item],
    responses: Sequence[str],
) -> Tuple[EvalReport, List[dict]]:
    """Accuracy of classified order labels; NoInfo is always incorrect."""
    if responses is None or len(responses) != len(items):
        raise MissingResponse(f"{0 if responses is None else len(responses)} responses for {len(items)} items")
    records: List[dict] = []
    correct = 0
    for idx, item in enumerate(items):
        response = responses[idx]
        if response is None:
            raise MissingResponse(f"item {idx} has no response")
        predicted = classify_order(response)
        hit = predicted == item.gt_label
        correct += hit
        records.append(
            {
                "video_id": item.video_id,
                "event_a": item.event_a.caption,
                "event_b": item.event_b.caption,
                "relation": item.relation.value,
                "gt_label": item.gt_label.value,
                "response": response,
                "pred_label": predicted.value,
                "correct": bool(hit),
            }
        )
    report = EvalReport(task="task2", n_items=len(items), acc=100.0 * correct / len(items))
    return report, records


def random_baseline_task1(
    annotations: Sequence[EventAnnotation],
    trials: int,
    seed: int,
    durations: Optional[Dict[str, float]] = None,
) -> Tuple[float, float]:
    """Monte-Carlo baseline: five i.i.d. uniform draws per item per trial.

    R@1 uses the first draw only, R@5 any of the five.  Durations come
    from the embedding store when the caller has one; otherwise the
    maximum annotated end per video stands in.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not annotations:
        raise ValueError("annotations must be nonempty")
    if durations is None:
        durations = _durations_from_items(annotations)
    for annotation in annotations:
        duration = durations.get(annotation.video_id)
        if duration is None or duration <= 0:
            raise UnknownDuration(f"no usable duration for video {annotation.video_id!r}")

    rng = random.Random(seed)
    r1_hits = r5_hits = 0
    total = trials * len(annotations)
    for _ in range(trials):
        for annotation in annotations:
            duration = durations[annotation.video_id]
            draws = [rng.uniform(0.0, duration) for _ in range(5)]
            if annotation.t_start <= draws[0] <= annotation.t_end:
                r1_hits += 1
            if any(annotation.t_start <= t <= annotation.t_end for t in draws):
                r5_hits += 1
    return 100.0 * r1_hits / total, 100.0 * r5_hits / total


def write_report(
    report: EvalReport,
    records: Sequence[dict],
    out_dir: Path | str,
    stem: str,
) -> EvalReport:
    """Write per-item JSONL plus a summary JSON; returns the updated report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    items_path = out / f"{stem}_items.jsonl"
    with open(items_path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
    report.items_path = items_path
    summary = {
        "task": report.task,
        "n_items": report.n_items,
        "r1_acc": report.r1_acc,
        "r5_acc": report.r5_acc,
        "acc": report.acc,
        "items": items_path.name,
    }
    (out / f"{stem}_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return report


def format_table(rows: Sequence[Tuple[str, Optional[float], Optional[float], Optional[float]]]) -> str:
    """Plain-text results table: (method, r1, r5, acc) per row."""
    def cell(value: Optional[float]) -> str:
        return f"{value:7.2f}" if value is not None else "      -"

    lines = [f"{'Method':<32} {'R@1':>7} {'R@5':>7} {'Acc':>7}"]
    lines.append("-" * len(lines[0]))
    for method, r1, r5, acc in rows:
        lines.append(f"{method:<32} {cell(r1)} {cell(r5)} {cell(acc)}")
    return "\n".join(lines)
