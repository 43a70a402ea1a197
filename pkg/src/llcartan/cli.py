"""``llcartan`` command line: list, run and verify registered scenarios.

Exit status is 0 when every check passes (expected failures count as passes),
1 when some check fails and 2 on usage errors.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click

from .scenarios import (
    ScenarioError,
    emit_report,
    emit_reports,
    get_scenario,
    list_scenarios,
    run_scenario,
)

FORMATS = ("json", "csv", "text")
# flags that map directly to scenario parameters
PARAM_FLAGS = ("m", "c", "samples", "seed", "fd_step", "tol")


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise click.UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _merge(config: dict, flags: dict) -> dict:
    """Flags win over config entries; ``None`` flags are ignored."""
    out = dict(config)
    out.update({k: v for k, v in flags.items() if v is not None})
    return out


def _split(settings: dict) -> tuple:
    """Separate scenario parameter overrides from output options."""
    opts = {k: settings.pop(k) for k in ("format", "out", "jobs", "timing") if k in settings}
    params = dict(settings.pop("params", {}) or {})
    for k in PARAM_FLAGS:
        if k in settings:
            params[k] = settings.pop(k)
    if settings:
        raise click.UsageError(f"unknown config keys: {', '.join(sorted(settings))}")
    return params, opts


def _parse_param(values) -> dict:
    out = {}
    for item in values:
        if "=" not in item:
            raise click.UsageError(f"--param expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.replace("-", "_")] = json.loads(v)
        except json.JSONDecodeError:
            out[k.replace("-", "_")] = v
    return out


def _write(data: bytes, out) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _run_one(args):
    name, overrides, timing = args
    return run_scenario(name, overrides, timing)


def _run_many(jobs_list, jobs: int):
    if jobs <= 1 or len(jobs_list) <= 1:
        return [_run_one(a) for a in jobs_list]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves submission order, so output stays deterministic
        return list(pool.map(_run_one, jobs_list))


def _common_options(f):
    opts = [
        click.option("--m", "m", type=int, default=None, help="Dimension m of the lightlike manifold."),
        click.option("--c", "c", type=float, default=None, help="Ambient parameter c (sigma = 1 + c rho)."),
        click.option("--samples", type=int, default=None, help="Number of sampled points."),
        click.option("--seed", type=int, default=None, help="Seed of the scenario generator."),
        click.option("--fd-step", "fd_step", type=float, default=None, help="Curve step for connection evaluation."),
        click.option("--tol", type=float, default=None, help="Override every tunable tolerance."),
        click.option("--format", "format", type=click.Choice(FORMATS), default=None, help="Report format."),
        click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here."),
        click.option("--jobs", type=int, default=None, help="Worker processes."),
        click.option("--timing", is_flag=True, default=None, help="Record wall time (breaks byte stability)."),
        click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON file with the same keys as the flags."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


@click.group()
def main():
    """Verify Cartan connections of lightlike hypersurfaces and ambient metrics."""


@main.command("list")
@click.option("--format", "format", type=click.Choice(("text", "json")), default="text")
def list_cmd(format):
    """List registered scenarios with their parameters."""
    cat = list_scenarios()
    if format == "json":
        click.echo(json.dumps(cat, sort_keys=True, indent=2))
        return
    for e in cat:
        params = ", ".join(f"{k}={v['default']}" for k, v in e["parameters"].items())
        click.echo(f"{e['name']:<24} {e['kind']:<20} {e['description']}")
        click.echo(f"{'':<24} anchors: {', '.join(e['anchors'])}")
        click.echo(f"{'':<24} params:  {params}")


@main.command("run")
@click.argument("scenario")
@_common_options
@click.option("--param", "extra", multiple=True, help="Extra scenario parameter KEY=VALUE.")
def run_cmd(scenario, config, extra, **flags):
    """Run one scenario and emit its report."""
    settings = _merge(_load_config(config), flags)
    params, opts = _split(settings)
    params.update(_parse_param(extra))
    try:
        get_scenario(scenario)
        report = run_scenario(scenario, params, bool(opts.get("timing")))
    except ScenarioError as exc:
        raise click.UsageError(str(exc)) from None
    _write(emit_report(report, opts.get("format") or "json"), opts.get("out"))
    sys.exit(0 if report.passed else 1)


@main.command("verify-all")
@_common_options
def verify_all_cmd(config, **flags):
    """Run every registered scenario.  ``--seed`` (and other flags) apply to all
    scenarios that accept them."""
    settings = _merge(_load_config(config), flags)
    params, opts = _split(settings)
    jobs_list = []
    try:
        for e in list_scenarios():
            sc = get_scenario(e["name"])
            ov = {k: v for k, v in params.items() if k in sc.schema}
            if "m" in ov and sc.constraints is not None:
                # scenarios with a pinned dimension keep their own m
                try:
                    sc.constraints({**sc.defaults, **ov})
                except ScenarioError:
                    ov.pop("m")
            jobs_list.append((e["name"], ov, bool(opts.get("timing"))))
        reports = _run_many(jobs_list, int(opts.get("jobs") or 1))
    except ScenarioError as exc:
        raise click.UsageError(str(exc)) from None
    _write(emit_reports(reports, opts.get("format") or "json"), opts.get("out"))
    sys.exit(0 if all(r.passed for r in reports) else 1)


if __name__ == "__main__":  # pragma: no cover
    main()
