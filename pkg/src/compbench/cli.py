"""Operator CLI: a thin client over the HTTP service.

Every command issues requests against the service API; by default an
in-process app instance handles them, and --server redirects the same
requests to a running instance. Exit codes: 0 success, 2 malformed config,
3 unknown metric/category name, 4 backend failure (including strict-replay
misses), 5 annotation conflict, 1 anything else.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import asdict
from typing import Any, Optional

import click

from .pipeline import CACHE_ENV_VAR, ConfigError, RunConfig, UnknownNameError
from .service.app import ANNOTATION_LOG_ENV_VAR, create_app

EXIT_CODES = {
    "config": 2,
    "unknown_name": 3,
    "metric": 3,
    "backend": 4,
    "annotation": 5,
    "not_found": 6,
    "suite": 2,
}


class ServiceFailure(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class ServiceClient:
    """Post to a remote server when given, otherwise to an in-process app."""

    def __init__(self, server: Optional[str], annotation_log: Optional[str] = None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=3600.0)
        else:
            from fastapi.testclient import TestClient

            self._client = TestClient(create_app(annotation_log))

    def request(self, method: str, path: str, **kwargs) -> dict[str, Any]:
        response = self._client.request(method, path, **kwargs)
        body = response.json()
        if response.status_code >= 400:
            raise ServiceFailure(body.get("code", "error"), body.get("message", str(body)))
        return body

    def post(self, path: str, payload: dict[str, Any]) -> dict[str, Any]:
        return self.request("POST", path, json=payload)

    def get(self, path: str, params: Optional[dict[str, Any]] = None) -> dict[str, Any]:
        return self.request("GET", path, params=params)


def _fail(err: Exception, code: str = "error") -> None:
    click.echo(f"error: {err}", err=True)
    sys.exit(EXIT_CODES.get(code, 1))


def _run(client: ServiceClient, method: str, path: str, **kwargs) -> dict[str, Any]:
    try:
        return client.request(method, path, **kwargs)
    except ServiceFailure as err:
        _fail(err, err.code)
    except ConfigError as err:
        _fail(err, "config")
    except Exception as err:  # noqa: BLE001 - CLI boundary
        _fail(err)


@click.group()
@click.option("--server", envvar="COMPBENCH_SERVER", default=None,
              help="Base URL of a running service; default runs in-process.")
@click.option("--annotation-log", envvar=ANNOTATION_LOG_ENV_VAR, default=None,
              help="Annotation event log for in-process commands.")
@click.pass_context
def main(ctx, server, annotation_log):
    """Compositional text-to-image benchmark toolkit."""
    ctx.obj = ServiceClient(server, annotation_log)


# -- suite --------------------------------------------------------------------


@main.group()
def suite():
    """Build or check prompt suites."""


@suite.command("generate")
@click.option("--out", required=True, help="Manifest JSON output path.")
@click.option("--seed", default=0, show_default=True)
@click.option("--per-category", default=1000, show_default=True)
@click.option("--write-prompt-files", is_flag=True,
              help="Also write per-category prompt files plus structure sidecars.")
@click.pass_obj
def suite_generate(client, out, seed, per_category, write_prompt_files):
    body = _run(client, "POST", "/suite/generate", json={
        "out_path": out,
        "seed": seed,
        "per_category": per_category,
        "write_prompt_files": write_prompt_files,
    })
    click.echo(f"wrote {body['record_count']} prompts to {body['suite_path']}")
    for category, count in sorted(body["category_counts"].items()):
        click.echo(f"  {category}: {count}")
    click.echo("ok" if body["ok"] else "note: full-scale count invariants not met")


@suite.command("validate")
@click.option("--suite", "suite_path", required=True, help="Manifest JSON to validate.")
@click.pass_obj
def suite_validate(client, suite_path):
    body = _run(client, "POST", "/suite/validate", json={"suite_path": suite_path})
    for category, count in sorted(body["category_counts"].items()):
        splits = body["split_counts"][category]
        novelty = body["novelty_counts"].get(category)
        line = f"  {category}: {count} (train {splits['train']} / test {splits['test']}"
        if novelty:
            line += f", seen {novelty['seen']} / unseen {novelty['unseen']}"
        click.echo(line + ")")
    if body["ok"]:
        click.echo("ok")
    else:
        for problem in body["problems"]:
            click.echo(f"problem: {problem}", err=True)
        sys.exit(1)


# -- evaluation -----------------------------------------------------------------


def _merge_config(config_path: Optional[str], overrides: dict[str, Any]) -> dict[str, Any]:
    if config_path:
        cfg = RunConfig.from_file(config_path, overrides)
    else:
        cfg = RunConfig.from_dict({k: v for k, v in overrides.items() if v is not None})
    return asdict(cfg)


@main.command()
@click.option("--config", "config_path", default=None, help="JSON config; flags win over it.")
@click.option("--suite", default=None, help="Suite manifest path.")
@click.option("--images", default=None, help="Image index JSON; omitted = generate (fake mode).")
@click.option("--metrics", default=None, help="Comma-separated metric names.")
@click.option("--backend-mode", default=None, type=click.Choice(["fake", "replay", "live"]))
@click.option("--replay-cache", default=None, envvar=CACHE_ENV_VAR)
@click.option("--record-cache", default=None)
@click.option("--out", default=None, help="Run directory.")
@click.option("--seed", default=None, type=int)
@click.option("--workers", default=None, type=int)
@click.option("--categories", default=None, help="Comma-separated category filter.")
@click.option("--split", default=None, type=click.Choice(["train", "test"]))
@click.option("--limit", "limit_per_category", default=None, type=int)
@click.pass_obj
def evaluate(client, config_path, suite, images, metrics, backend_mode, replay_cache,
             record_cache, out, seed, workers, categories, split, limit_per_category):
    """Score a suite's images with selected metrics."""
    overrides = {
        "suite": suite,
        "images": images,
        "metrics": metrics.split(",") if metrics else None,
        "backend_mode": backend_mode,
        "replay_cache": replay_cache,
        "record_cache": record_cache,
        "out": out,
        "seed": seed,
        "workers": workers,
        "categories": categories.split(",") if categories else None,
        "split": split,
        "limit_per_category": limit_per_category,
    }
    try:
        payload = _merge_config(config_path, overrides)
    except UnknownNameError as err:
        _fail(err, "unknown_name")
    except ConfigError as err:
        _fail(err, "config")
    body = _run(client, "POST", "/evaluate", json=payload)
    summary = body["summary"]
    click.echo(f"scores: {summary['score_count']} -> {body['score_store']}")
    for category, per_metric in sorted(summary["per_category"].items()):
        means = ", ".join(f"{m}={v:.4f}" for m, v in sorted(per_metric.items()))
        click.echo(f"  {category}: {means}")
    if summary["missing_images"]:
        click.echo(f"missing images for {len(summary['missing_images'])} prompts", err=True)


@main.command()
@click.option("--scores", required=True, help="Score store JSONL.")
@click.option("--ratings", required=True, help="Exported human ratings JSON.")
@click.option("--include-incomplete", is_flag=True)
@click.option("--out", default=None, help="Write correlation rows as JSON here.")
@click.pass_obj
def correlate(client, scores, ratings, include_incomplete, out):
    """Rank-correlate metric scores against human ratings."""
    body = _run(client, "POST", "/correlate", json={
        "scores": scores, "ratings": ratings, "include_incomplete": include_incomplete,
    })
    click.echo(body["table"] or "no correlations computed")
    for entry in body["skipped"]:
        click.echo(f"skipped {entry['metric']}/{entry['category']}: {entry['reason']}", err=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(body["rows"], fh, indent=2, sort_keys=True)


# -- reward-driven selection ----------------------------------------------------


@main.group()
def gors():
    """Reward-driven sample selection."""


@gors.command("select")
@click.option("--suite", required=True)
@click.option("--out", default="runs/gors", show_default=True)
@click.option("--backend-mode", default="fake", type=click.Choice(["fake", "replay", "live"]),
              show_default=True)
@click.option("--replay-cache", default=None, envvar=CACHE_ENV_VAR)
@click.option("--record-cache", default=None)
@click.option("--seed", default=0, show_default=True)
@click.option("--k", "k_per_prompt", default=10, show_default=True,
              help="Images generated per prompt.")
@click.option("--threshold", default=None, type=float,
              help="Selection threshold for every category; default is the per-category median.")
@click.option("--ablation", default="none", type=click.Choice(["none", "half", "zero"]),
              show_default=True)
@click.option("--categories", default=None)
@click.option("--split", default=None, type=click.Choice(["train", "test"]))
@click.option("--limit", "limit_per_category", default=None, type=int)
@click.pass_obj
def gors_select(client, suite, out, backend_mode, replay_cache, record_cache, seed,
                k_per_prompt, threshold, ablation, categories, split, limit_per_category):
    """Generate k images per prompt, score them, and keep the high-reward ones."""
    body = _run(client, "POST", "/gors/select", json={
        "suite": suite,
        "out": out,
        "backend_mode": backend_mode,
        "replay_cache": replay_cache,
        "record_cache": record_cache,
        "seed": seed,
        "k_per_prompt": k_per_prompt,
        "threshold": threshold,
        "ablation": ablation,
        "categories": categories.split(",") if categories else None,
        "split": split,
        "limit_per_category": limit_per_category,
    })
    click.echo(f"selected {body['selected_count']} of {body['sample_count']} samples")
    for category, value in sorted(body["thresholds"].items()):
        click.echo(f"  threshold {category}: {value:.4f}")
    if body.get("manifest_path"):
        click.echo(f"training manifest: {body['manifest_path']}")
    if body["empty_selection"]:
        click.echo("selection is empty; no manifest written", err=True)


# -- annotation ----------------------------------------------------------------


@main.group()
def annotate():
    """Host and manage the human-rating service."""


@annotate.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--log", default="annotations.jsonl", show_default=True,
              help="Append-only event log; state is rebuilt from it on start.")
def annotate_serve(host, port, log):
    """Run the annotation (and pipeline) HTTP service."""
    import uvicorn

    uvicorn.run(create_app(log), host=host, port=port, log_level="info")


@annotate.command("batch")
@click.option("--batch-id", required=True)
@click.option("--suite", required=True)
@click.option("--images", required=True, multiple=True,
              help="model=index.json (repeatable).")
@click.option("--images-per-prompt", default=2, show_default=True)
@click.option("--prompts-per-cell", default=25, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--ratings-needed", default=3, show_default=True)
@click.option("--categories", default=None)
@click.pass_obj
def annotate_batch(client, batch_id, suite, images, images_per_prompt, prompts_per_cell,
                   seed, ratings_needed, categories):
    """Create rating tasks from a suite and per-model image indexes."""
    image_map = {}
    for spec in images:
        if "=" not in spec:
            _fail(ValueError(f"--images expects model=path, got {spec!r}"), "config")
        model, path = spec.split("=", 1)
        image_map[model] = path
    body = _run(client, "POST", "/batches", json={
        "batch_id": batch_id,
        "suite": suite,
        "images": image_map,
        "images_per_prompt": images_per_prompt,
        "prompts_per_cell": prompts_per_cell,
        "seed": seed,
        "ratings_needed": ratings_needed,
        "categories": categories.split(",") if categories else None,
    })
    click.echo(f"batch {body['batch_id']}: {body['task_count']} tasks")


@annotate.command("export")
@click.option("--batch", default=None)
@click.option("--out", default=None, help="Write the export JSON here.")
@click.pass_obj
def annotate_export(client, batch, out):
    """Export aggregated ratings for correlation."""
    params = {"batch": batch} if batch else None
    body = _run(client, "GET", "/export", params=params)
    text = json.dumps(body, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        complete = sum(1 for e in body["entries"] if e["complete"])
        click.echo(f"exported {len(body['entries'])} entries ({complete} complete) to {out}")
    else:
        click.echo(text)


# -- reporting -----------------------------------------------------------------


@main.command()
@click.option("--fixture", default=None,
              help="Results fixture JSON; defaults to the packaged published numbers.")
@click.option("--summary", "summaries", multiple=True,
              help="model=summary.json from an evaluation run (repeatable).")
@click.option("--out", default=None, help="Write rankings JSON here.")
@click.pass_obj
def report(client, fixture, summaries, out):
    """Render per-category result tables and ranking leaders."""
    summary_map = {}
    for spec in summaries:
        if "=" not in spec:
            _fail(ValueError(f"--summary expects model=path, got {spec!r}"), "config")
        model, path = spec.split("=", 1)
        summary_map[model] = path
    body = _run(client, "POST", "/report", json={
        "fixture": fixture,
        "summaries": summary_map or None,
    })
    click.echo(body["table"])
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(body["rankings"], fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
