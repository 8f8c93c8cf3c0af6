import json
import socket

import pytest
from click.testing import CliRunner

from agentsight.cli import main
from agentsight.gateway import load_records, metrics_summary


@pytest.fixture()
def runner():
    return CliRunner()


def test_ingest_cli_ok(runner, mini, tmp_path):
    report = tmp_path / "report.json"
    result = runner.invoke(main, ["ingest", str(mini.users_path), str(mini.posts_path),
                                  str(mini.edges_path), "--report-out", str(report)])
    assert result.exit_code == 0, result.output
    assert "500 users, 5000 posts, 10000 edges" in result.output
    doc = json.loads(report.read_text())
    assert doc["manifest"]["users"] == 500


def test_ingest_cli_strict_dangling_edge(runner, tmp_path):
    (tmp_path / "users.csv").write_text(
        "user_id,created_at\nu1,2020-01-01T00:00:00Z\n", encoding="utf-8")
    (tmp_path / "posts.jsonl").write_text("", encoding="utf-8")
    (tmp_path / "edges.csv").write_text(
        "src_id,dst_id,kind,at\nu1,u9,follows,2020-01-01T00:00:00Z\n", encoding="utf-8")
    result = runner.invoke(main, ["ingest", str(tmp_path / "users.csv"),
                                  str(tmp_path / "posts.jsonl"),
                                  str(tmp_path / "edges.csv"), "--strict"])
    assert result.exit_code == 1
    assert "edges.csv:2" in result.output


def test_synth_cli(runner, tmp_path):
    result = runner.invoke(main, ["synth", str(tmp_path / "data"), "--seed", "2020"])
    assert result.exit_code == 0
    assert (tmp_path / "data" / "manifest.json").exists()


def test_run_cli_offline_and_deterministic(runner, tmp_path, monkeypatch, mini):
    # the scripted-mock replay must not open any network socket
    real_socket = socket.socket

    def guard(*args, **kwargs):
        raise AssertionError("network socket opened during offline run")

    monkeypatch.setattr(socket, "socket", guard)
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        result = runner.invoke(main, [
            "run", "--scenario", "covid2020", "--out", str(out),
            "--data-dir", str(mini.users_path.parent)])
        assert result.exit_code == 0, result.output
        files = sorted(p.name for p in out.glob("*.json*"))
        payload = {name: (out / name).read_bytes() for name in files
                   if name != "events.json"}
        outputs.append(payload)
    monkeypatch.setattr(socket, "socket", real_socket)
    assert outputs[0].keys() == outputs[1].keys()
    for name in outputs[0]:
        assert outputs[0][name] == outputs[1][name], f"{name} differs between runs"
    viz_files = [name for name in outputs[0] if name.startswith("viz-")]
    assert len(viz_files) == 4  # three word clouds + one line chart
    assert "report.json" in outputs[0]


def test_metrics_cli_matches_library(runner, tmp_path):
    log = tmp_path / "log.jsonl"
    result = runner.invoke(main, ["metrics", "--replay-errors", "0.12", "--n", "1000",
                                  "--seed", "5", "--save-log", str(log)])
    assert result.exit_code == 0, result.output
    records = load_records(log)
    summary = metrics_summary(records)
    assert set(summary) == {"Plan", "Invoke"}
    for kind, row in summary.items():
        assert f"{row['error_rate']:>9.4f}" in result.output
        assert f"{row['mean_latency']:>9.4f}" in result.output
    first = [r for r in records if r.attempt == 1]
    rate = sum(1 for r in first if r.outcome != "Ok") / len(first)
    assert abs(rate - 0.12) <= 0.03


def test_metrics_cli_log_file(runner, tmp_path):
    log = tmp_path / "log.jsonl"
    runner.invoke(main, ["metrics", "--replay-errors", "0.0", "--n", "10",
                         "--save-log", str(log)])
    result = runner.invoke(main, ["metrics", str(log)])
    assert result.exit_code == 0
    assert "Plan" in result.output and "Invoke" in result.output


def test_dump_viz_cli(runner, tmp_path, mini):
    out = tmp_path / "run"
    result = runner.invoke(main, ["run", "--scenario", "covid2020", "--out", str(out),
                                  "--data-dir", str(mini.users_path.parent)])
    assert result.exit_code == 0
    session = json.loads((out / "session.json").read_text())
    viz_id = sorted(session["specs"])[0]
    result = runner.invoke(main, ["dump-viz", str(out), viz_id])
    assert result.exit_code == 0
    doc = json.loads(result.output)
    assert doc["viz_id"] == viz_id
    result2 = runner.invoke(main, ["dump-viz", str(out), "nope"])
    assert result2.exit_code == 1
