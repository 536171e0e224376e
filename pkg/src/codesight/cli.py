"""Command-line client for the pipeline service.

Commands parse flags, build the service request, and POST it: against an
in-process ASGI app by default (no sockets, fully offline) or against a
remote service when --server is given. Configuration precedence is
flag > environment (token only) > config file.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path
from typing import Any, Mapping

import anyio
import click
import httpx

from . import __version__
from .pipeline import DEFAULT_DEPLOY_PATTERN, parse_window

TOKEN_ENV_VAR = "CODESIGHT_GITHUB_TOKEN"


def load_config(path: Path | str | None) -> dict[str, str]:
    """Flat key = value config file; '#' starts a comment."""
    if path is None:
        return {}
    config: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.ClickException(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        config[key.strip()] = value.strip()
    return config


async def _request_async(
    server: str | None, path: str, payload: Mapping[str, Any]
) -> tuple[int, Any]:
    if server:
        async with httpx.AsyncClient(base_url=server, timeout=600.0) as client:
            resp = await client.post(path, json=dict(payload))
    else:
        from .service.app import create_app

        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://codesight.internal", timeout=600.0
        ) as client:
            resp = await client.post(path, json=dict(payload))
    try:
        body = resp.json()
    except json.JSONDecodeError:
        body = {"detail": {"code": "bad_response", "message": resp.text[:200]}}
    return resp.status_code, body


def call_service(server: str | None, path: str, payload: Mapping[str, Any]) -> Any:
    """POST to the service; on failure print one machine-parseable line and exit 1."""
    try:
        status, body = anyio.run(_request_async, server, path, payload)
    except httpx.HTTPError as exc:
        click.echo(f'error: {json.dumps({"code": "transport", "message": str(exc)})}', err=True)
        sys.exit(1)
    if status >= 400:
        detail = body.get("detail", body) if isinstance(body, dict) else body
        if not isinstance(detail, dict):
            detail = {"code": "error", "message": str(detail)}
        click.echo(f"error: {json.dumps(detail, sort_keys=True)}", err=True)
        sys.exit(1)
    return body


def _emit(result: Any) -> None:
    click.echo(json.dumps(result, indent=2, sort_keys=True))


def _merged(flag: Any, config: Mapping[str, str], key: str, default: Any = None) -> Any:
    if flag is not None:
        return flag
    if key in config:
        return config[key]
    return default


@click.group()
@click.version_option(version=__version__)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Key = value config file; flags override it.")
@click.option("--server", default=None, help="Remote service URL; default runs in-process.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None, server: str | None) -> None:
    """PR process mining, DevOps metrics, and remaining-time datasets."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = load_config(config_path)
    ctx.obj["server"] = server or load_config(config_path).get("server")


@main.command()
@click.option("--repo", "repo_slug", default=None, help="owner/name")
@click.option("--branch", default=None, help="Keep only PRs targeting this branch.")
@click.option("--token", default=None, help=f"GitHub token; falls back to ${TOKEN_ENV_VAR}.")
@click.option("--fixture", "fixture_dir", default=None,
              help="Replay a recorded fixture directory instead of the live API.")
@click.option("--out", "out_path", default=None, help="Snapshot output path.")
@click.pass_context
def fetch(ctx: click.Context, repo_slug: str | None, branch: str | None,
          token: str | None, fixture_dir: str | None, out_path: str | None) -> None:
    """Fetch PRs, details, commits, and workflow runs into a snapshot."""
    config = ctx.obj["config"]
    repo_slug = _merged(repo_slug, config, "repo")
    if not repo_slug or "/" not in repo_slug:
        raise click.ClickException("--repo owner/name is required")
    owner, name = repo_slug.split("/", 1)
    token = token or os.environ.get(TOKEN_ENV_VAR) or config.get("token")
    payload = {
        "owner": owner,
        "repo": name,
        "branch": _merged(branch, config, "branch"),
        "token": token,
        "fixture_dir": _merged(fixture_dir, config, "fixture"),
        "out_path": _merged(out_path, config, "snapshot", "snapshot.json"),
    }
    _emit(call_service(ctx.obj["server"], "/fetch", payload))


@main.command()
@click.option("--cases", "n_cases", type=int, default=None, help="Number of synthetic PRs.")
@click.option("--seed", type=int, default=None)
@click.option("--compliance-target", type=float, default=None)
@click.option("--out", "out_dir", default=None, help="Output directory.")
@click.pass_context
def synth(ctx: click.Context, n_cases: int | None, seed: int | None,
          compliance_target: float | None, out_dir: str | None) -> None:
    """Generate a synthetic snapshot plus its ground-truth law."""
    config = ctx.obj["config"]
    payload = {
        "n_cases": int(_merged(n_cases, config, "cases", 100)),
        "seed": int(_merged(seed, config, "seed", 0)),
        "compliance_target": float(_merged(compliance_target, config, "compliance_target", 0.70)),
        "out_dir": _merged(out_dir, config, "out", "synth-out"),
    }
    _emit(call_service(ctx.obj["server"], "/synth", payload))


@main.command()
@click.option("--snapshot", "snapshot_path", default=None)
@click.option("--out", "out_csv", default=None, help="Event-log CSV output path.")
@click.option("--rejects", "rejects_path", default=None, help="Rejects JSONL output path.")
@click.pass_context
def transform(ctx: click.Context, snapshot_path: str | None, out_csv: str | None,
              rejects_path: str | None) -> None:
    """Build the unified event log from a snapshot and export it as CSV."""
    config = ctx.obj["config"]
    payload = {
        "snapshot_path": _merged(snapshot_path, config, "snapshot", "snapshot.json"),
        "out_csv": _merged(out_csv, config, "log", "events.csv"),
        "rejects_path": rejects_path,
    }
    _emit(call_service(ctx.obj["server"], "/transform", payload))


@main.command()
@click.option("--log", "log_csv", default=None, help="Event-log CSV from transform.")
@click.option("--snapshot", "snapshot_path", default=None,
              help="Snapshot used to re-attach run names and unmatched runs.")
@click.option("--out", "out_path", default=None, help="Report output path.")
@click.option("--format", "format_", type=click.Choice(["json", "markdown"]), default=None)
@click.option("--deploy-pattern", default=None, help="Regex marking deploy workflow names.")
@click.option("--window", default=None, help="Metrics window START..END (RFC 3339 or epoch).")
@click.option("--plots", "plots_dir", default=None, help="Also write histogram images here.")
@click.pass_context
def mine(ctx: click.Context, log_csv: str | None, snapshot_path: str | None,
         out_path: str | None, format_: str | None, deploy_pattern: str | None,
         window: str | None, plots_dir: str | None) -> None:
    """Mine traces/variants/durations and DORA metrics into a report."""
    config = ctx.obj["config"]
    window_value = _merged(window, config, "window")
    start, end = (None, None)
    if window_value:
        try:
            start, end = parse_window(window_value)
        except ValueError as exc:
            raise click.ClickException(str(exc)) from exc
    payload = {
        "log_csv": _merged(log_csv, config, "log", "events.csv"),
        "snapshot_path": _merged(snapshot_path, config, "snapshot"),
        "out_path": _merged(out_path, config, "out", "report.json"),
        "format": _merged(format_, config, "format", "json"),
        "deploy_pattern": _merged(deploy_pattern, config, "deploy_pattern", DEFAULT_DEPLOY_PATTERN),
        "window_start": start,
        "window_end": end,
        "plots_dir": plots_dir,
    }
    _emit(call_service(ctx.obj["server"], "/mine", payload))


@main.command()
@click.option("--log", "log_csv", default=None, help="Event-log CSV from transform.")
@click.option("--snapshot", "snapshot_path", default=None)
@click.option("--out", "out_dir", default=None, help="Dataset output directory.")
@click.option("--seed", type=int, default=None)
@click.option("--fractions", default=None, help="train,val,test e.g. 0.70,0.15,0.15")
@click.option("--samples-per-trace", type=int, default=None,
              help="Truncation samples drawn per case (default 1).")
@click.pass_context
def featurize(ctx: click.Context, log_csv: str | None, snapshot_path: str | None,
              out_dir: str | None, seed: int | None, fractions: str | None,
              samples_per_trace: int | None) -> None:
    """Truncate traces and export the encoded dataset directory."""
    config = ctx.obj["config"]
    payload = {
        "log_csv": _merged(log_csv, config, "log", "events.csv"),
        "snapshot_path": _merged(snapshot_path, config, "snapshot", "snapshot.json"),
        "out_dir": _merged(out_dir, config, "out", "dataset"),
        "seed": int(_merged(seed, config, "seed", 0)),
        "samples_per_trace": int(_merged(samples_per_trace, config, "samples_per_trace", 1)),
    }
    fractions_value = _merged(fractions, config, "fractions")
    if fractions_value:
        parts = [p.strip() for p in str(fractions_value).split(",")]
        if len(parts) != 3:
            raise click.ClickException("--fractions needs three comma-separated numbers")
        payload["train_fraction"] = float(parts[0])
        payload["val_fraction"] = float(parts[1])
        payload["test_fraction"] = float(parts[2])
    _emit(call_service(ctx.obj["server"], "/featurize", payload))


@main.command()
@click.option("--report", "report_json", default=None, help="Mining report JSON to re-render.")
@click.option("--out", "out_path", default=None)
@click.option("--format", "format_", type=click.Choice(["json", "markdown"]), default=None)
@click.pass_context
def report(ctx: click.Context, report_json: str | None, out_path: str | None,
           format_: str | None) -> None:
    """Re-render a mining report into markdown or JSON."""
    config = ctx.obj["config"]
    payload = {
        "report_json": _merged(report_json, config, "report", "report.json"),
        "out_path": _merged(out_path, config, "out", "report.md"),
        "format": _merged(format_, config, "format", "markdown"),
    }
    _emit(call_service(ctx.obj["server"], "/report", payload))


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8321)
def serve(host: str, port: int) -> None:
    """Run the pipeline service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
