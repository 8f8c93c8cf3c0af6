"""Command-line interface: ingest, run (offline scenario replay), serve,
metrics, dump-viz, synth."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import EngineConfig, _deep_merge, load_config
from .datastore import IngestOptions, ingest
from .errors import AgentSightError
from .gateway import (Gateway, LlmAction, PromptSections, ScriptedMock,
                      load_records, metrics_summary)
from .server import build_gateway, create_app, load_scenario
from .session import Session
from .synthetic import generate_mini_dataset
from .taxonomy import load_taxonomy


def _dump_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


@click.group()
def main() -> None:
    """Agent-driven insight discovery engine."""


@main.command("ingest")
@click.argument("users", type=click.Path(exists=True))
@click.argument("posts", type=click.Path(exists=True))
@click.argument("edges", type=click.Path(exists=True))
@click.option("--strict", is_flag=True, help="reject dangling references and naive timestamps")
@click.option("--report-out", type=click.Path(), default=None)
def ingest_cmd(users: str, posts: str, edges: str, strict: bool, report_out: str | None):
    """Build a snapshot from USERS (csv), POSTS (jsonl), EDGES (csv)."""
    try:
        snapshot, report = ingest(users, posts, edges, IngestOptions(strict=strict))
    except AgentSightError as exc:
        click.echo(f"ingest failed: {exc}", err=True)
        sys.exit(1)
    click.echo(f"snapshot {snapshot.snapshot_id}: "
               f"{report.user_count} users, {report.post_count} posts, "
               f"{report.edge_count} edges, {len(report.rejected)} rejected rows")
    for rej in report.rejected[:10]:
        click.echo(f"  rejected {rej['file']}:{rej['row']}: {rej['reason']}")
    if report_out:
        _dump_json(Path(report_out), {"manifest": snapshot.manifest,
                                      "report": report.to_dict()})


@main.command("synth")
@click.argument("out_dir", type=click.Path())
@click.option("--seed", type=int, default=2020)
def synth_cmd(out_dir: str, seed: int):
    """Generate the seeded synthetic mini dataset (500/5000/10000)."""
    ds = generate_mini_dataset(out_dir, seed=seed)
    click.echo(f"wrote {ds.users_path}, {ds.posts_path}, {ds.edges_path}")
    click.echo(f"manifest: users={ds.manifest['users']} posts={ds.manifest['posts']} "
               f"edges={ds.manifest['edges']}")


@main.command("run")
@click.option("--scenario", default="covid2020",
              help="bundled scenario name or path to a scenario file")
@click.option("--goal", default=None, help="override the scenario goal")
@click.option("--data-dir", type=click.Path(), default=None,
              help="directory with users.csv/posts.jsonl/edges.csv "
                   "(generated there when missing)")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), default="run-output")
@click.option("--seed", type=int, default=2020, help="dataset generator seed")
def run_cmd(scenario: str, goal: str | None, data_dir: str | None,
            config_path: str | None, out_dir: str, seed: int):
    """Replay a scenario offline: goal + snapshot + mock transcript ->
    tree, report, and viz spec files."""
    doc = load_scenario(scenario)
    config = load_config(config_path)
    if doc.get("config"):
        merged = _deep_merge(config.model_dump(), doc["config"])
        config = EngineConfig(**merged).validate_constraints()

    data = Path(data_dir) if data_dir else Path(out_dir) / "data"
    if not (data / "users.csv").exists():
        generate_mini_dataset(data, seed=seed)
    snapshot, _ = ingest(data / "users.csv", data / "posts.jsonl", data / "edges.csv")

    counter = iter(range(1, 10_000_000))
    gateway = build_gateway(config, doc.get("transcript", {}),
                            clock=lambda: float(next(counter)))
    session = Session("s1", snapshot, config, gateway, load_taxonomy())
    session.start(goal or doc["goal"])
    session.run_to_completion()

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    assert session.tree is not None
    _dump_json(out / "tree.json", session.tree.to_dict())
    _dump_json(out / "display_tree.json", session.display_tree().to_dict())
    _dump_json(out / "session.json", session.state_dict())
    if session.report is not None:
        report_doc = session.report.to_dict()
        report_doc["plan"] = session.report_plan.to_dict() if session.report_plan else None
        _dump_json(out / "report.json", report_doc)
    for viz_id in sorted(session.state.specs):
        _dump_json(out / f"{viz_id}.json", session.state.specs[viz_id].to_dict())
    gateway.dump_records(out / "actions.jsonl")
    _dump_json(out / "events.json", session.events)

    n_specs = len(session.state.specs)
    n_items = len(session.report.items) if session.report else 0
    click.echo(f"session s1: {len(session.tree.nodes)} nodes, {n_specs} viz specs, "
               f"{n_items} report items -> {out}")
    if session.advisory:
        click.echo(f"advisory: {session.advisory}")


@main.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8040)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--data-dir", type=click.Path(), default=None)
def serve_cmd(host: str, port: int, config_path: str | None, data_dir: str | None):
    """Serve the HTTP API (and the UI build when frontend/dist exists)."""
    import uvicorn

    config = load_config(config_path)
    snapshot = None
    if data_dir:
        d = Path(data_dir)
        if not (d / "users.csv").exists():
            generate_mini_dataset(d)
        snapshot, _ = ingest(d / "users.csv", d / "posts.jsonl", d / "edges.csv")
    app = create_app(config, snapshot)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command("metrics")
@click.argument("log_path", type=click.Path(exists=True), required=False)
@click.option("--replay-errors", type=float, default=None,
              help="instead of a log, replay N synthetic actions through the "
                   "mock with this injection rate")
@click.option("--n", "n_actions", type=int, default=1000)
@click.option("--seed", type=int, default=5)
@click.option("--max-retries", type=int, default=2)
@click.option("--save-log", type=click.Path(), default=None)
def metrics_cmd(log_path: str | None, replay_errors: float | None, n_actions: int,
                seed: int, max_retries: int, save_log: str | None):
    """Summarize an action log (mean/std latency + first-attempt error rate
    per action kind), or replay synthetic actions to produce one."""
    if log_path is None and replay_errors is None:
        click.echo("provide a log file or --replay-errors", err=True)
        sys.exit(2)
    if log_path is not None:
        records = load_records(log_path)
    else:
        gateway = Gateway(ScriptedMock({"seed": seed, "error_rate": replay_errors,
                                        "synthesize": True}),
                          max_retries=max_retries)
        resolved = 0
        for i in range(n_actions):
            kind = "Plan" if i % 2 == 0 else "Invoke"
            action = LlmAction(
                kind=kind, stage="mine" if kind == "Invoke" else "goal",
                prompt=PromptSections(system="replay", path_context="",
                                      task=f"action {i}", output_schema="{}"),
                schema_id="rubric_score" if kind == "Invoke" else "interpretation",
                context={"i": i},
            )
            try:
                gateway.call(action)
                resolved += 1
            except AgentSightError:
                pass
        records = gateway.records
        click.echo(f"replayed {n_actions} actions; "
                   f"{resolved / n_actions:.4f} succeeded within {max_retries} retries")
        if save_log:
            gateway.dump_records(save_log)
    summary = metrics_summary(records)
    if not summary:
        click.echo("empty log")
        return
    header = f"{'kind':<8} {'actions':>8} {'attempts':>9} {'mean lat':>9} {'std lat':>9} {'err rate':>9}"
    click.echo(header)
    for kind, row in sorted(summary.items()):
        click.echo(f"{kind:<8} {row['actions']:>8} {row['attempts']:>9} "
                   f"{row['mean_latency']:>9.4f} {row['std_latency']:>9.4f} "
                   f"{row['error_rate']:>9.4f}")


@main.command("dump-viz")
@click.argument("run_dir", type=click.Path(exists=True))
@click.argument("viz_id")
@click.option("--out", type=click.Path(), default=None)
def dump_viz_cmd(run_dir: str, viz_id: str, out: str | None):
    """Extract one viz spec from a run's serialized session state."""
    state_file = Path(run_dir) / "session.json"
    if not state_file.exists():
        click.echo(f"no session.json under {run_dir}", err=True)
        sys.exit(1)
    doc = json.loads(state_file.read_text(encoding="utf-8"))
    spec = doc.get("specs", {}).get(viz_id)
    if spec is None:
        click.echo(f"unknown viz id {viz_id}; available: "
                   f"{sorted(doc.get('specs', {}))}", err=True)
        sys.exit(1)
    text = json.dumps(spec, sort_keys=True, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text)


if __name__ == "__main__":
    main()
