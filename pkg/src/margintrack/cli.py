"""Command-line client for the tracking service.

Commands talk to an in-process service instance by default; pass --server
to target a running `margintrack serve` over HTTP instead.
"""

from __future__ import annotations

import contextlib
import json

import click
import httpx

from .dataset import SYNTH_KINDS
from .errors import InvalidInputError
from .optimizer import MODES
from .tracker import TrackerConfig, _coerce


@contextlib.contextmanager
def _client(server: str | None):
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            yield client
        return
    from fastapi.testclient import TestClient

    from .service import create_app
    with TestClient(create_app()) as client:
        yield client


def _config_payload(config_file: str | None, sets: tuple[str, ...]) -> dict:
    """Validate config inputs client-side so bad ones exit as usage errors."""
    overrides = {}
    for item in sets:
        if "=" not in item:
            raise click.UsageError(f"--set expects key=value, got {item!r}")
        key, raw = (part.strip() for part in item.split("=", 1))
        try:
            overrides[key] = _coerce(key, raw, "--set", 0)
        except InvalidInputError as exc:
            raise click.UsageError(str(exc)) from exc
    try:
        if config_file is not None:
            config = TrackerConfig.from_file(config_file, overrides)
        else:
            config = TrackerConfig.from_dict(overrides)
    except (InvalidInputError, OSError) as exc:
        raise click.UsageError(str(exc)) from exc
    return config.to_dict()


def _post(client, path: str, payload: dict) -> dict:
    try:
        response = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        raise click.ClickException(f"request failed: {exc}") from exc
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except (ValueError, AttributeError):
            detail = response.text
        raise click.ClickException(f"{path} -> {response.status_code}: {detail}")
    return response.json()


@click.group()
@click.version_option(package_name="margintrack")
def main():
    """Real-time single-object tracker with a benchmark harness."""


_shared = [
    click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
                 default=None, help="flat key = value config file"),
    click.option("--set", "sets", multiple=True, metavar="KEY=VALUE",
                 help="override a single config value (repeatable)"),
    click.option("--server", default=None, metavar="URL",
                 help="remote service URL (default: run in-process)"),
]


def _with_shared(command):
    for option in reversed(_shared):
        command = option(command)
    return command


@main.command()
@click.option("--seq", "sequence_dir", required=True,
              type=click.Path(exists=True, file_okay=False),
              help="sequence directory (img/ frames + groundtruth_rect.txt)")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="write a line-delimited JSON result log here")
@click.option("--mode", type=click.Choice(MODES), default=None,
              help="filter flavor (default: config value)")
@click.option("--overlay", "overlay_dir", type=click.Path(file_okay=False),
              default=None, help="write per-frame overlay PNGs here")
@click.option("--timing", is_flag=True,
              help="record real per-frame latencies (logs stop being reproducible)")
@click.option("--no-multimodal", is_flag=True,
              help="disable secondary-peak re-detection")
@click.option("--always-update", is_flag=True,
              help="bypass the confidence gate and update on every frame")
@_with_shared
def track(sequence_dir, out, mode, overlay_dir, timing, no_multimodal,
          always_update, config_file, sets, server):
    """Track one sequence and report summary statistics."""
    config = _config_payload(config_file, sets)
    if mode is not None:
        config["mode"] = mode
    if no_multimodal:
        config["multimodal"] = False
    if always_update:
        config["always_update"] = True
    payload = {"sequence_dir": sequence_dir, "config": config, "out": out,
               "overlay_dir": overlay_dir, "timing": timing}
    with _client(server) as client:
        data = _post(client, "/track", payload)
    failed = sum(r["failed"] for r in data["results"])
    click.echo(f"{data['sequence']}: {data['n_frames']} frames, "
               f"update rate {data['update_rate']:.2f}, "
               f"mean speed {data['mean_fps']:.1f} FPS, "
               f"{failed} failed frames")
    if out:
        click.echo(f"log written to {out}")


@main.command()
@click.option("--dataset", "root", required=True, envvar="MARGINTRACK_DATASET",
              type=click.Path(exists=True, file_okay=False),
              help="dataset root (env MARGINTRACK_DATASET)")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True,
              help="directory for per-sequence logs and the report")
@click.option("--filter", "filter_names", default=None, metavar="NAMES",
              help="comma-separated sequence names to run (default: all)")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="sequences tracked in parallel")
@click.option("--timing", is_flag=True,
              help="record real per-frame latencies (logs stop being reproducible)")
@_with_shared
def bench(root, out_dir, filter_names, jobs, timing, config_file, sets, server):
    """Track every sequence under the dataset root and score the results."""
    if jobs < 1:
        raise click.UsageError("--jobs must be at least 1")
    config = _config_payload(config_file, sets)
    names = None
    if filter_names:
        names = [n.strip() for n in filter_names.split(",") if n.strip()]
    payload = {"root": root, "out_dir": out_dir, "jobs": jobs,
               "timing": timing, "config": config, "filter": names}
    with _client(server) as client:
        data = _post(client, "/bench", payload)
    width = max([len(s["name"]) for s in data["sequences"]] + [8])
    click.echo(f"{'sequence':<{width}}  frames  prec@20  auc    mean_ce  mean_iou")
    for s in data["sequences"]:
        click.echo(f"{s['name']:<{width}}  {s['n_frames']:>6d}  "
                   f"{s['precision_at_20']:>7.3f}  {s['auc']:.3f}  "
                   f"{s['mean_center_error']:>7.2f}  {s['mean_overlap']:>8.3f}")
    click.echo(f"overall: precision@20 {data['precision_at_20']:.3f}, "
               f"auc {data['auc']:.3f}")
    click.echo(f"report written to {data['out_dir']}")


@main.command()
@click.option("--instances", type=int, default=25, show_default=True,
              help="random instances per numeric check")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--server", default=None, metavar="URL")
def selftest(instances, seed, server):
    """Verify the fast paths against brute-force references."""
    with _client(server) as client:
        data = _post(client, "/selftest", {"instances": instances, "seed": seed})
    for check in data["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        click.echo(f"{status}  {check['name']}: {check['detail']}")
    if not data["passed"]:
        raise click.ClickException("selftest failed")
    click.echo("all checks passed")


@main.command()
@click.argument("kind", type=click.Choice(SYNTH_KINDS))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--frames", "num_frames", type=int, default=None,
              help="override the kind's default length")
@click.option("--server", default=None, metavar="URL")
def synth(kind, out_dir, seed, num_frames, server):
    """Write a deterministic synthetic sequence in the standard layout."""
    payload = {"kind": kind, "out_dir": out_dir, "seed": seed,
               "num_frames": num_frames}
    with _client(server) as client:
        data = _post(client, "/synth", payload)
    click.echo(f"{data['sequence']}: {data['n_frames']} frames at {data['path']}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the tracking service over HTTP."""
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=host, port=port)


@main.command()
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
def inspect(log_path):
    """Summarize a result log."""
    from .dataset import read_results
    from .errors import ResultLogError
    try:
        header, records = read_results(log_path)
    except ResultLogError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps(header, sort_keys=True))
    updated = sum(r.get("updated", False) for r in records)
    click.echo(f"{len(records)} frames, {updated} model updates")


if __name__ == "__main__":
    main()
