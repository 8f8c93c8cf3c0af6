import json
import random

import jsonschema
import pytest
from fastapi.testclient import TestClient

from agentsight.server import RESPONSE_SCHEMAS, create_app


@pytest.fixture(scope="module")
def client(tiny_snapshot, fuzz_config):
    app = create_app(fuzz_config, tiny_snapshot)
    return TestClient(app)


@pytest.fixture(scope="module")
def session_id(client):
    r = client.post("/api/v1/sessions",
                    json={"goal": "how do communities form and what do they discuss?",
                          "auto": True})
    assert r.status_code == 201
    _check(r.json(), "session_created")
    return r.json()["session_id"]


def _check(doc, schema_id):
    jsonschema.validate(doc, RESPONSE_SCHEMAS[schema_id])


def test_session_status(client, session_id):
    r = client.get(f"/api/v1/sessions/{session_id}")
    assert r.status_code == 200
    _check(r.json(), "session_status")


def test_display_tree(client, session_id):
    r = client.get(f"/api/v1/sessions/{session_id}/tree")
    assert r.status_code == 200
    _check(r.json(), "display_tree")
    assert r.json()["kind"] == "Root"


def test_expand_node_returns_raw_nodes(client, session_id):
    tree = client.get(f"/api/v1/sessions/{session_id}/tree").json()
    target = tree["children"][0]["display_id"]
    r = client.post(f"/api/v1/sessions/{session_id}/nodes/{target}/expand")
    assert r.status_code == 200
    _check(r.json(), "raw_nodes")
    assert r.json()["nodes"]


def test_miner_detail_rows(client, session_id):
    tree = client.get(f"/api/v1/sessions/{session_id}/tree").json()

    def miners(d):
        out = []
        if d["kind"] == "Miner":
            out.extend(d["raw_node_ids"])
        for c in d["children"]:
            out.extend(miners(c))
        return out

    found = miners(tree)
    assert found
    r = client.get(f"/api/v1/sessions/{session_id}/nodes/{found[0]}/miner")
    assert r.status_code == 200
    _check(r.json(), "miner_detail")
    rows = r.json()["rows"]
    assert rows and all("e_m" in row or row.get("error") for row in rows)


def test_report_with_node_cross_refs(client, session_id):
    r = client.get(f"/api/v1/sessions/{session_id}/report")
    assert r.status_code == 200
    _check(r.json(), "report")
    tree = client.get(f"/api/v1/sessions/{session_id}/tree").json()

    def all_raw(d):
        out = list(d["raw_node_ids"])
        for c in d["children"]:
            out.extend(all_raw(c))
        return out

    raw = set(all_raw(tree))
    for item in r.json()["items"]:
        assert item["source_node"] in raw


def test_viz_spec_endpoint(client, session_id):
    report = client.get(f"/api/v1/sessions/{session_id}/report").json()
    viz_id = report["items"][0]["view_refs"][0]
    r = client.get(f"/api/v1/sessions/{session_id}/viz/{viz_id}")
    assert r.status_code == 200
    _check(r.json(), "viz_spec")


def test_trace_endpoint(client, session_id):
    report = client.get(f"/api/v1/sessions/{session_id}/report").json()
    viz_id = report["items"][0]["view_refs"][0]
    spec = client.get(f"/api/v1/sessions/{session_id}/viz/{viz_id}").json()
    # find a word item if present, otherwise skip tracing detail
    words = [i["item_id"] for i in spec["data_items"] if i["kind"] == "word"]
    if words:
        r = client.get(f"/api/v1/sessions/{session_id}/trace",
                       params={"element": words[0], "target": "post"})
        assert r.status_code == 200
        _check(r.json(), "trace_result")


def test_refine_endpoint(client, session_id):
    r = client.post(f"/api/v1/sessions/{session_id}/refine",
                    json={"goal": "并且 how does engagement change?"})
    assert r.status_code == 200
    _check(r.json(), "refine_result")


def test_metrics_endpoint(client, session_id):
    r = client.get(f"/api/v1/sessions/{session_id}/metrics")
    assert r.status_code == 200
    _check(r.json(), "metrics")


def test_404_unknown_session(client):
    assert client.get("/api/v1/sessions/zzz/tree").status_code == 404


def test_404_unknown_viz(client, session_id):
    assert client.get(f"/api/v1/sessions/{session_id}/viz/nope").status_code == 404


def test_409_mutation_of_terminated_node(client, session_id):
    tree = client.get(f"/api/v1/sessions/{session_id}/tree").json()

    def find_terminated(d):
        if d["status"] == "Terminated":
            return d["raw_node_ids"][0]
        for c in d["children"]:
            hit = find_terminated(c)
            if hit:
                return hit
        return None

    nid = find_terminated(tree)
    assert nid is not None
    r = client.post(f"/api/v1/sessions/{session_id}/nodes/{nid}/validate",
                    json={"verdict": "fine"})
    assert r.status_code == 409


def test_422_invalid_payload(client):
    assert client.post("/api/v1/sessions", json={"goal": ""}).status_code == 422
    assert client.post("/api/v1/sessions", json={}).status_code == 422


def test_fuzz_1000_valid_requests_schema_conformance(client, session_id):
    rng = random.Random(2024)
    tree = client.get(f"/api/v1/sessions/{session_id}/tree").json()

    def all_raw(d):
        out = list(d["raw_node_ids"])
        for c in d["children"]:
            out.extend(all_raw(c))
        return out

    node_ids = all_raw(tree)
    report = client.get(f"/api/v1/sessions/{session_id}/report").json()
    viz_ids = sorted({ref for item in report["items"] for ref in item["view_refs"]})

    endpoints = ["status", "tree", "expand", "miner", "report", "viz", "metrics"]
    for _ in range(1000):
        kind = rng.choice(endpoints)
        if kind == "status":
            r = client.get(f"/api/v1/sessions/{session_id}")
            _check(r.json(), "session_status")
        elif kind == "tree":
            r = client.get(f"/api/v1/sessions/{session_id}/tree")
            _check(r.json(), "display_tree")
        elif kind == "expand":
            nid = rng.choice(node_ids)
            r = client.post(f"/api/v1/sessions/{session_id}/nodes/{nid}/expand")
            _check(r.json(), "raw_nodes")
        elif kind == "miner":
            nid = rng.choice(node_ids)
            r = client.get(f"/api/v1/sessions/{session_id}/nodes/{nid}/miner")
            if r.status_code == 200:
                _check(r.json(), "miner_detail")
            else:
                assert r.status_code == 404
        elif kind == "report":
            r = client.get(f"/api/v1/sessions/{session_id}/report")
            _check(r.json(), "report")
        elif kind == "viz":
            if viz_ids:
                r = client.get(f"/api/v1/sessions/{session_id}/viz/"
                               f"{rng.choice(viz_ids)}")
                _check(r.json(), "viz_spec")
        else:
            r = client.get(f"/api/v1/sessions/{session_id}/metrics")
            _check(r.json(), "metrics")


def test_api_token_enforced(tiny_snapshot, fuzz_config):
    cfg = fuzz_config.model_copy(deep=True)
    cfg.api_token = "sekrit"
    app = create_app(cfg, tiny_snapshot)
    c = TestClient(app)
    assert c.get("/api/v1/sessions/s1").status_code == 401
    r = c.post("/api/v1/sessions", json={"goal": "g", "auto": False},
               headers={"x-api-token": "sekrit"})
    assert r.status_code == 201


def test_state_persistence_roundtrip(tmp_path, tiny_snapshot, fuzz_config):
    cfg = fuzz_config.model_copy(deep=True)
    cfg.state_dir = str(tmp_path / "state")
    app = create_app(cfg, tiny_snapshot)
    c = TestClient(app)
    r = c.post("/api/v1/sessions", json={"goal": "persist me", "auto": True})
    sid = r.json()["session_id"]
    saved = json.loads((tmp_path / "state" / f"{sid}.json").read_text())
    assert saved["session_id"] == sid
    assert saved["tree"]["nodes"]
    # a fresh app over the same state dir sees the serialized session
    app2 = create_app(cfg, tiny_snapshot)
    assert sid in app2.state.engine.restored
