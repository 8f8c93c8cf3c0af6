"""HTTP API for the UI and for remote batch use.

All endpoints are versioned under /api/v1 and return JSON documents whose
shapes are published in RESPONSE_SCHEMAS (also dumped to docs/). Session
mutations are funneled through each session's writer lock; reads serve a
consistent snapshot of the tree.
"""

from __future__ import annotations

import json
import time
from importlib import resources
from pathlib import Path
from typing import Any

from fastapi import Depends, FastAPI, HTTPException, Request
from pydantic import BaseModel, Field

from .config import EngineConfig, load_config
from .datastore import DatasetSnapshot, ingest, IngestOptions
from .errors import AgentSightError, PlannerError, TerminatedNodeError
from .gateway import Gateway, RemoteHttp, ScriptedMock, metrics_summary
from .session import Session
from .synthetic import generate_mini_dataset
from .taxonomy import load_taxonomy

_FRACTION = {"type": "number"}

RESPONSE_SCHEMAS: dict[str, dict] = {
    "session_created": {
        "type": "object",
        "required": ["session_id", "status", "tree"],
        "properties": {
            "session_id": {"type": "string"},
            "status": {"type": "string"},
            "advisory": {"type": ["string", "null"]},
            "tree": {"type": "object"},
        },
    },
    "session_status": {
        "type": "object",
        "required": ["session_id", "status"],
        "properties": {
            "session_id": {"type": "string"},
            "status": {"type": "string"},
            "advisory": {"type": ["string", "null"]},
            "snapshot_id": {"type": "string"},
            "goal": {"type": "string"},
        },
    },
    "display_tree": {
        "type": "object",
        "required": ["display_id", "kind", "label", "raw_node_ids", "children"],
        "properties": {
            "display_id": {"type": "string"},
            "kind": {"type": "string"},
            "label": {"type": "string"},
            "raw_node_ids": {"type": "array", "items": {"type": "string"}},
            "collapsed": {"type": "boolean"},
            "status": {"type": "string"},
            "signal": {"type": ["object", "null"]},
            "badge": {"type": "object"},
            "children": {"type": "array"},
        },
    },
    "raw_nodes": {
        "type": "object",
        "required": ["nodes"],
        "properties": {"nodes": {"type": "array", "items": {
            "type": "object", "required": ["node_id", "kind", "status", "context"]}}},
    },
    "miner_detail": {
        "type": "object",
        "required": ["node_id", "method", "rows"],
        "properties": {
            "node_id": {"type": "string"},
            "method": {"type": "string"},
            "rows": {"type": "array", "items": {"type": "object"}},
        },
    },
    "report": {
        "type": "object",
        "required": ["items", "evals"],
        "properties": {
            "items": {"type": "array", "items": {
                "type": "object",
                "required": ["insight_id", "five_w", "narrative", "view_refs",
                             "source_node"]}},
            "evals": {"type": "array", "items": {"type": "object"}},
            "advisory": {"type": ["string", "null"]},
            "plan": {"type": ["object", "null"]},
        },
    },
    "viz_spec": {
        "type": "object",
        "required": ["viz_id", "viz_type", "encodings", "data_items"],
        "properties": {
            "viz_id": {"type": "string"},
            "viz_type": {"type": "string"},
            "title": {"type": "string"},
            "encodings": {"type": "object"},
            "params": {"type": "object"},
            "provenance": {"type": "object"},
            "data_items": {"type": "array", "items": {"type": "object"}},
            "eval": {"type": ["object", "null"]},
            "source_node": {"type": ["string", "null"]},
        },
    },
    "trace_result": {
        "type": "object",
        "required": ["nodes"],
        "properties": {"nodes": {"type": "array", "items": {"type": "string"}}},
    },
    "refine_result": {
        "type": "object",
        "required": ["new_nodes"],
        "properties": {"new_nodes": {"type": "array", "items": {"type": "string"}}},
    },
    "metrics": {
        "type": "object",
        "additionalProperties": {
            "type": "object",
            "required": ["mean_latency", "std_latency", "error_rate"],
            "properties": {
                "mean_latency": _FRACTION, "std_latency": _FRACTION,
                "error_rate": _FRACTION, "actions": {"type": "integer"},
                "attempts": {"type": "integer"},
            },
        },
    },
    "ok": {"type": "object", "required": ["ok"], "properties": {"ok": {"type": "boolean"}}},
}


class CreateSessionBody(BaseModel):
    goal: str = Field(min_length=1)
    scenario: str | None = None
    auto: bool = True


class RefineBody(BaseModel):
    goal: str = Field(min_length=1)


class AddConfigBody(BaseModel):
    params: dict[str, Any]


class ValidateBody(BaseModel):
    verdict: str = Field(min_length=1)


def load_scenario(name_or_path: str) -> dict:
    p = Path(name_or_path)
    if p.exists():
        return json.loads(p.read_text(encoding="utf-8"))
    ref = resources.files("agentsight.data.scenarios").joinpath(f"{name_or_path}.json")
    try:
        return json.loads(ref.read_text("utf-8"))
    except FileNotFoundError:
        raise AgentSightError(f"unknown scenario {name_or_path!r}") from None


def build_gateway(config: EngineConfig, transcript: dict | None = None,
                  clock=None) -> Gateway:
    b = config.backend
    if b.type == "remote":
        backend = RemoteHttp(endpoint=b.endpoint, model=b.model, auth_env=b.auth_env,
                             timeout=b.timeout)
    else:
        t = transcript
        if t is None and b.transcript:
            t = load_scenario(b.transcript).get("transcript", {})
        backend = ScriptedMock(t or {"seed": b.seed, "error_rate": b.error_rate})
    return Gateway(backend, max_retries=config.thresholds.max_retries,
                   clock=clock or time.time)


class EngineApp:
    """Process-wide state: snapshot registry, sessions, persistence."""

    def __init__(self, config: EngineConfig, snapshot: DatasetSnapshot):
        self.config = config
        self.snapshot = snapshot
        self.taxonomy = load_taxonomy()
        self.sessions: dict[str, Session] = {}
        self._counter = 0
        self.state_dir = Path(config.state_dir) if config.state_dir else None
        if self.state_dir:
            self.state_dir.mkdir(parents=True, exist_ok=True)
        self.restored: dict[str, dict] = {}
        if self.state_dir:
            for f in sorted(self.state_dir.glob("*.json")):
                try:
                    doc = json.loads(f.read_text(encoding="utf-8"))
                    self.restored[doc["session_id"]] = doc
                except (json.JSONDecodeError, KeyError):
                    continue

    def new_session(self, goal: str, scenario: str | None, auto: bool) -> Session:
        self._counter += 1
        sid = f"s{self._counter}"
        transcript = None
        config = self.config
        if scenario:
            doc = load_scenario(scenario)
            transcript = doc.get("transcript")
            if doc.get("config"):
                from .config import _deep_merge
                merged = _deep_merge(config.model_dump(), doc["config"])
                config = EngineConfig(**merged).validate_constraints()
        counter = iter(range(1, 10_000_000))
        gateway = build_gateway(config, transcript,
                                clock=lambda: float(next(counter)))
        session = Session(sid, self.snapshot, config, gateway, self.taxonomy)
        self.sessions[sid] = session
        session.start(goal)
        if auto and session.tree is not None:
            session.run_to_completion()
        self.persist(session)
        return session

    def persist(self, session: Session) -> None:
        if self.state_dir and session.tree is not None:
            path = self.state_dir / f"{session.session_id}.json"
            path.write_text(session.serialize(), encoding="utf-8")

    def get_session(self, sid: str) -> Session:
        if sid not in self.sessions:
            raise HTTPException(status_code=404, detail=f"unknown session {sid}")
        return self.sessions[sid]


def create_app(config: EngineConfig | None = None,
               snapshot: DatasetSnapshot | None = None,
               data_dir: str | Path | None = None) -> FastAPI:
    config = config or load_config()
    if snapshot is None:
        if config.data.users and config.data.posts and config.data.edges:
            snapshot, _ = ingest(config.data.users, config.data.posts, config.data.edges,
                                 IngestOptions(strict=config.data.strict))
        else:
            import tempfile
            work = Path(data_dir) if data_dir else Path(tempfile.mkdtemp(prefix="agentsight-"))
            ds = generate_mini_dataset(work)
            snapshot, _ = ingest(ds.users_path, ds.posts_path, ds.edges_path)
    engine = EngineApp(config, snapshot)
    app = FastAPI(title="agentsight engine", version="0.1.0")
    app.state.engine = engine

    def check_token(request: Request) -> None:
        token = engine.config.api_token
        if token and request.headers.get("x-api-token") != token:
            raise HTTPException(status_code=401, detail="missing or bad api token")

    dep = [Depends(check_token)]

    @app.exception_handler(TerminatedNodeError)
    async def _terminated(request, exc):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(PlannerError)
    async def _planner(request, exc):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.post("/api/v1/sessions", status_code=201, dependencies=dep)
    def create_session(body: CreateSessionBody):
        session = engine.new_session(body.goal, body.scenario, body.auto)
        assert session.tree is not None
        return {"session_id": session.session_id,
                "status": "complete" if session.report else "open",
                "advisory": session.advisory,
                "tree": session.display_tree().to_dict()}

    @app.get("/api/v1/sessions/{sid}", dependencies=dep)
    def session_status(sid: str):
        s = engine.get_session(sid)
        assert s.tree is not None
        return {"session_id": sid,
                "status": "complete" if s.report else "open",
                "advisory": s.advisory,
                "snapshot_id": s.snapshot.snapshot_id,
                "goal": s.tree.goal}

    @app.get("/api/v1/sessions/{sid}/tree", dependencies=dep)
    def display_tree(sid: str):
        return engine.get_session(sid).display_tree().to_dict()

    @app.post("/api/v1/sessions/{sid}/nodes/{nid}/expand", dependencies=dep)
    def expand_node(sid: str, nid: str):
        s = engine.get_session(sid)
        assert s.tree is not None
        display = s.display_tree()

        def find(d):
            if d.display_id == nid or nid in d.raw_node_ids:
                return d
            for c in d.children:
                hit = find(c)
                if hit is not None:
                    return hit
            return None

        hit = find(display)
        if hit is None:
            raise HTTPException(status_code=404, detail=f"unknown node {nid}")
        return {"nodes": [s.tree.get(r).to_dict() for r in hit.raw_node_ids]}

    @app.get("/api/v1/sessions/{sid}/nodes/{nid}/miner", dependencies=dep)
    def miner_detail(sid: str, nid: str):
        s = engine.get_session(sid)
        ms = s.state.miners.get(nid)
        if ms is None:
            raise HTTPException(status_code=404, detail=f"{nid} is not a miner node")
        return {"node_id": nid, "method": ms.method_id, "rows": s.miner_rows(nid)}

    @app.post("/api/v1/sessions/{sid}/nodes/{nid}/configs", dependencies=dep)
    def add_config(sid: str, nid: str, body: AddConfigBody):
        s = engine.get_session(sid)
        ms = s.add_mining_config(nid, body.params)
        engine.persist(s)
        return {"node_id": nid, "method": ms.method_id, "rows": s.miner_rows(nid)}

    @app.post("/api/v1/sessions/{sid}/refine", dependencies=dep)
    def refine(sid: str, body: RefineBody):
        s = engine.get_session(sid)
        new_nodes = s.refine_goal(body.goal)
        for nid in list(new_nodes):
            s.step(nid)
        engine.persist(s)
        return {"new_nodes": new_nodes}

    @app.post("/api/v1/sessions/{sid}/nodes/{nid}/validate", dependencies=dep)
    def validate_node(sid: str, nid: str, body: ValidateBody):
        s = engine.get_session(sid)
        s.validate_node(nid, body.verdict)
        engine.persist(s)
        return {"ok": True}

    @app.get("/api/v1/sessions/{sid}/report", dependencies=dep)
    def report(sid: str):
        s = engine.get_session(sid)
        if s.report is None:
            raise HTTPException(status_code=404, detail="no report yet")
        doc = s.report.to_dict()
        doc["plan"] = s.report_plan.to_dict() if s.report_plan else None
        return doc

    @app.get("/api/v1/sessions/{sid}/viz/{viz_id}", dependencies=dep)
    def viz_spec(sid: str, viz_id: str):
        s = engine.get_session(sid)
        spec = s.state.specs.get(viz_id)
        if spec is None:
            raise HTTPException(status_code=404, detail=f"unknown viz {viz_id}")
        doc = spec.to_dict()
        ev = s.state.viz_evals.get(viz_id)
        doc["eval"] = ev.to_dict() if ev else None
        doc["source_node"] = s.state.spec_nodes.get(viz_id)
        return doc

    @app.get("/api/v1/sessions/{sid}/trace", dependencies=dep)
    def trace_endpoint(sid: str, element: str, target: str):
        s = engine.get_session(sid)
        try:
            return {"nodes": s.trace(element, target)}
        except AgentSightError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None

    @app.get("/api/v1/sessions/{sid}/trace_window", dependencies=dep)
    def trace_window(sid: str, start: float, end: float, target: str = "word"):
        s = engine.get_session(sid)
        try:
            return {"nodes": s.trace_window(start, end, target)}
        except AgentSightError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None

    @app.get("/api/v1/sessions/{sid}/metrics", dependencies=dep)
    def session_metrics(sid: str):
        s = engine.get_session(sid)
        return metrics_summary(s.gateway.records)

    frontend = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if frontend.is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(frontend), html=True), name="ui")

    return app
