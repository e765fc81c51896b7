"""Command-line surface tying the modules into batch workflows.

Commands: ground (claim for one query), correct (rewrite a response),
eval (task 1/2 scoring and the random baseline), validate-store.
Offline is the default; remote transform/embedding services are opt-in
flags.  Exit codes: 0 success, 1 validation findings, 2 input/IO
error, 3 external-service error.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import click

from . import store as store_mod
from .claims import (
    CorrectionRequest,
    build_claim_for_query,
    correct_response,
    fallback_correct,
    top5_for_result,
)
from .clients import (
    FileEmbeddingClient,
    RemoteEmbeddingClient,
    RemoteTransformClient,
    RuleFallbackClient,
)
from .errors import ClientUnavailable, EmbeddingFailure, StoreError, TempGroundError
from .harness import (
    build_task1,
    build_task2,
    format_table,
    ingest_charades_sta,
    random_baseline_task1,
    score_task1,
    score_task2,
    write_report,
)
from .scoring import DnConfig, TextMeanPopulation

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_INPUT = 2
EXIT_SERVICE = 3

logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")


@dataclasses.dataclass
class RunConfig:
    store_root: Optional[Path] = None
    backends: Optional[list] = None
    lam: float = 0.25
    text_mean_population: str = "current_query_actions"
    transform_endpoint: Optional[str] = None
    embed_endpoint: Optional[str] = None
    offline: bool = True
    seed: int = 0
    jobs: int = 1
    output_dir: Path = Path("out")

    def dn_config(self) -> DnConfig:
        return DnConfig(
            lam=self.lam,
            text_mean_population=TextMeanPopulation(self.text_mean_population),
        )


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    with open(path, "rb") as handle:
        return tomllib.load(handle)


def _merge_config(config_path, store, offline, jobs, seed, lam, backends,
                  transform_endpoint, embed_endpoint, out) -> RunConfig:
    data = _load_config(config_path)
    cfg = RunConfig()
    for key in ("lam", "text_mean_population", "transform_endpoint",
                "embed_endpoint", "offline", "seed", "jobs"):
        if key in data:
            setattr(cfg, key, data[key])
    if "store_root" in data:
        cfg.store_root = Path(data["store_root"])
    if "backends" in data:
        cfg.backends = list(data["backends"])
    if "output_dir" in data:
        cfg.output_dir = Path(data["output_dir"])
    # Flags win over the config file.
    if store:
        cfg.store_root = Path(store)
    if offline is not None:
        cfg.offline = offline
    if jobs:
        cfg.jobs = jobs
    if seed is not None:
        cfg.seed = seed
    if lam is not None:
        cfg.lam = lam
    if backends:
        cfg.backends = [b.strip() for b in backends.split(",") if b.strip()]
    if transform_endpoint:
        cfg.transform_endpoint = transform_endpoint
        cfg.offline = False
    if embed_endpoint:
        cfg.embed_endpoint = embed_endpoint
        cfg.offline = False
    if out:
        cfg.output_dir = Path(out)
    return cfg


def _transform_client(cfg: RunConfig):
    if not cfg.offline and cfg.transform_endpoint:
        return RemoteTransformClient(cfg.transform_endpoint)
    return RuleFallbackClient()


def _embed_client(cfg: RunConfig, text_embeddings: Sequence[str]):
    if not cfg.offline and cfg.embed_endpoint:
        return RemoteEmbeddingClient(cfg.embed_endpoint)
    if not text_embeddings:
        raise EmbeddingFailure(
            "offline mode needs --text-embeddings JSON file(s) with precomputed query embeddings"
        )
    return FileEmbeddingClient(text_embeddings)


def _common_options(func):
    options = [
        click.option("--store", type=click.Path(), help="Embedding store root."),
        click.option("--config", "config_path", type=click.Path(exists=True), help="TOML config file."),
        click.option("--offline/--online", default=None, help="Run without remote services (default)."),
        click.option("--jobs", type=int, default=None, help="Worker pool size."),
        click.option("--seed", type=int, default=None, help="RNG seed."),
        click.option("--lambda", "lam", type=float, default=None, help="DN mean-shift weight."),
        click.option("--backends", type=str, default=None, help="Comma-separated backend names."),
        click.option("--transform-endpoint", type=str, default=None),
        click.option("--embed-endpoint", type=str, default=None),
        click.option("--out", type=click.Path(), default=None, help="Output directory."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
def main() -> None:
    """Temporal grounding of event queries and response correction."""


def _run_pipeline(cfg: RunConfig, video_id: str, query: str,
                  text_embeddings: Sequence[str], require_activation: bool):
    video = store_mod.load_video_embeddings(cfg.store_root, video_id)
    transform = _transform_client(cfg)
    embed = _embed_client(cfg, text_embeddings)
    return video, transform, build_claim_for_query(
        video,
        query,
        transform,
        embed,
        cfg.dn_config(),
        backends=cfg.backends,
        require_activation=require_activation,
    )


def _append_jsonl(path: Path, record: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(json.dumps(record, sort_keys=True) + "\n")


@main.command("ground")
@_common_options
@click.option("--video-id", required=True)
@click.option("--query", required=True)
@click.option("--text-embeddings", multiple=True, type=click.Path(exists=True),
              help="Precomputed query-embedding JSON (repeatable).")
@click.option("--require-activation", is_flag=True, default=False,
              help="Pass through non-temporal queries instead of grounding them.")
def cmd_ground(store, config_path, offline, jobs, seed, lam, backends,
               transform_endpoint, embed_endpoint, out,
               video_id, query, text_embeddings, require_activation):
    """Print the claim for one query against one stored video."""
    cfg = _merge_config(config_path, store, offline, jobs, seed, lam, backends,
                        transform_endpoint, embed_endpoint, out)
    try:
        if cfg.store_root is None:
            raise StoreError("no --store given")
        _, _, result = _run_pipeline(cfg, video_id, query, text_embeddings, require_activation)
    except StoreError as exc:
        click.echo(f"store error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except (ClientUnavailable, EmbeddingFailure) as exc:
        click.echo(f"client error: {exc}", err=True)
        sys.exit(EXIT_SERVICE)

    if result.claim is None:
        click.echo("query needs no temporal support; nothing to ground")
        sys.exit(EXIT_OK)

    click.echo(result.claim.text)
    _append_jsonl(
        cfg.output_dir / "grounding.jsonl",
        {
            "video_id": video_id,
            "query": query,
            "actions": [
                {
                    "text": g.action.text,
                    "timestamp": g.chosen_timestamp,
                    "top5": [e.timestamp_seconds for e in g.best.entries[:5]],
                }
                for g in result.grounded
            ],
            "claim": list(result.claim.lines),
        },
    )
    sys.exit(EXIT_OK)


@main.command("correct")
@_common_options
@click.option("--video-id", required=True)
@click.option("--query", required=True)
@click.option("--response-file", type=click.Path(), required=True,
              help="File holding the original model response.")
@click.option("--text-embeddings", multiple=True, type=click.Path(exists=True))
def cmd_correct(store, config_path, offline, jobs, seed, lam, backends,
                transform_endpoint, embed_endpoint, out,
                video_id, query, response_file, text_embeddings):
    """Rewrite a model response so it agrees with the grounded claim."""
    cfg = _merge_config(config_path, store, offline, jobs, seed, lam, backends,
                        transform_endpoint, embed_endpoint, out)
    try:
        original = Path(response_file).read_text(encoding="utf-8").strip()
        if not original:
            raise OSError("response file is empty")
    except OSError as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(EXIT_INPUT)

    try:
        if cfg.store_root is None:
            raise StoreError("no --store given")
        video, transform, result = _run_pipeline(
            cfg, video_id, query, text_embeddings, require_activation=True
        )
    except StoreError as exc:
        click.echo(f"store error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except (ClientUnavailable, EmbeddingFailure) as exc:
        click.echo(f"client error: {exc}", err=True)
        sys.exit(EXIT_SERVICE)

    used_fallback = False
    if result.claim is None:
        corrected = original
    else:
        request = CorrectionRequest(
            user_query=query, original_response=original, claim=result.claim
        )
        try:
            corrected = correct_response(request, transform)
        except (ClientUnavailable, TempGroundError) as exc:
            click.echo(f"correction client failed, using rule fallback: {exc}", err=True)
            corrected = fallback_correct(original, result.claim, video.meta.duration_seconds)
            used_fallback = True

    click.echo(corrected)
    _append_jsonl(
        cfg.output_dir / "corrections.jsonl",
        {
            "video_id": video_id,
            "query": query,
            "original": original,
            "corrected": corrected,
            "claim": list(result.claim.lines) if result.claim else [],
            "used_fallback": used_fallback,
        },
    )
    sys.exit(EXIT_OK)


def _score_task1_chunked(items, responses, jobs: int):
    """Free-text Task-1 scoring, optionally chunked over a worker pool.

    Chunks are merged back in input order so the report and records are
    identical to a sequential run.
    """
    from .harness import EvalReport

    if jobs <= 1 or len(items) < 2:
        return score_task1(items, responses=responses)
    chunk = (len(items) + jobs - 1) // jobs
    slices = [(items[i:i + chunk], responses[i:i + chunk]) for i in range(0, len(items), chunk)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(lambda s: score_task1(s[0], responses=s[1]), slices))
    records = [record for _, chunk_records in parts for record in chunk_records]
    hits = sum(sub.acc * sub.n_items / 100.0 for sub, _ in parts)
    report = EvalReport(task="task1", n_items=len(items), acc=100.0 * hits / len(items))
    return report, records


def _read_responses(path: str, n_expected: int) -> list:
    """Responses as JSONL records with a "response" field, or plain lines."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    responses = []
    for line in lines:
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            responses.append(record["response"] if isinstance(record, dict) else str(record))
        except json.JSONDecodeError:
            responses.append(line)
    return responses


def _read_predictions(path: str) -> list:
    preds = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        preds.append([float(t) for t in record["pred_top5"]])
    return preds


@main.command("eval")
@_common_options
@click.option("--task", type=click.Choice(["1", "2"]), required=True)
@click.option("--annotations", type=click.Path(), required=True,
              help="Charades-STA style annotation file.")
@click.option("--responses", "responses_path", type=click.Path(), default=None)
@click.option("--predictions", "predictions_path", type=click.Path(), default=None,
              help="Pipeline mode: JSONL with pred_top5 per item.")
@click.option("--random-baseline", is_flag=True, default=False)
@click.option("--trials", type=int, default=100)
@click.option("--max-per-video", type=int, default=2)
def cmd_eval(store, config_path, offline, jobs, seed, lam, backends,
             transform_endpoint, embed_endpoint, out,
             task, annotations, responses_path, predictions_path,
             random_baseline, trials, max_per_video):
    """Build and score the timestamp / order prediction tasks."""
    cfg = _merge_config(config_path, store, offline, jobs, seed, lam, backends,
                        transform_endpoint, embed_endpoint, out)
    try:
        annos = ingest_charades_sta(annotations)
    except (OSError, TempGroundError) as exc:
        click.echo(f"ingest error: {exc}", err=True)
        sys.exit(EXIT_INPUT)

    out_dir = cfg.output_dir
    try:
        if task == "1":
            if random_baseline:
                r1, r5 = random_baseline_task1(annos, trials=trials, seed=cfg.seed)
                click.echo(format_table([("Random", r1, r5, None)]))
                out_dir.mkdir(parents=True, exist_ok=True)
                (out_dir / "task1_random_summary.json").write_text(
                    json.dumps(
                        {"task": "task1-random", "trials": trials, "seed": cfg.seed,
                         "r1_acc": r1, "r5_acc": r5},
                        indent=2, sort_keys=True,
                    ) + "\n",
                    encoding="utf-8",
                )
                sys.exit(EXIT_OK)
            items = build_task1(annos)
            if predictions_path:
                preds = _read_predictions(predictions_path)
                report, records = score_task1(items, top_k_predictions=preds)
                row = ("pipeline", report.r1_acc, report.r5_acc, None)
            elif responses_path:
                responses = _read_responses(responses_path, len(items))
                report, records = _score_task1_chunked(items, responses, cfg.jobs)
                row = ("free-text", None, None, report.acc)
            else:
                click.echo("task 1 needs --responses, --predictions, or --random-baseline", err=True)
                sys.exit(EXIT_INPUT)
            report = write_report(report, records, out_dir, "task1")
        else:
            items = build_task2(annos, seed=cfg.seed, max_per_video=max_per_video)
            if not responses_path:
                click.echo("task 2 needs --responses", err=True)
                sys.exit(EXIT_INPUT)
            responses = _read_responses(responses_path, len(items))
            report, records = score_task2(items, responses)
            row = ("order", None, None, report.acc)
            report = write_report(report, records, out_dir, "task2")
    except TempGroundError as exc:
        click.echo(f"evaluation error: {exc}", err=True)
        sys.exit(EXIT_INPUT)

    click.echo(format_table([row]))
    click.echo(f"items: {report.items_path}")
    sys.exit(EXIT_OK)


@main.command("validate-store")
@click.option("--store", type=click.Path(), required=True)
def cmd_validate_store(store):
    """List stored videos and report schema or invariant violations."""
    root = Path(store)
    if not root.is_dir():
        click.echo(f"store root {root} does not exist", err=True)
        sys.exit(EXIT_INPUT)

    findings = 0
    video_ids = sorted(p.name for p in root.iterdir() if p.is_dir())
    if not video_ids:
        click.echo("no videos found", err=True)
        sys.exit(EXIT_INPUT)
    for video_id in video_ids:
        try:
            emb_set = store_mod.load_video_embeddings(root, video_id)
        except (StoreError, ValueError, KeyError, TypeError) as exc:
            click.echo(f"{video_id}: VIOLATION {exc}")
            findings += 1
            continue
        shapes = ", ".join(
            f"{name}[{m.num_frames}x{m.dim}]" for name, m in sorted(emb_set.backends.items())
        )
        click.echo(
            f"{video_id}: ok N={emb_set.meta.num_frames} fps={emb_set.meta.fps} "
            f"L={emb_set.meta.duration_seconds} {shapes}"
        )
    sys.exit(EXIT_FINDINGS if findings else EXIT_OK)


if __name__ == "__main__":
    main()
