"""Backend-agnostic LLM access.

Two backends: a remote chat-completion endpoint and a scripted mock that
replays transcripts deterministically, optionally injecting i.i.d. errors
per attempt. The gateway owns the retry loop and appends one ActionRecord
per attempt; action-level metrics are computed from that log.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import random
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from .errors import (GatewayExhaustedError, SchemaValidationError, TransportError)
from .schemas import JSON_SCHEMAS, validate_response


@dataclass(frozen=True)
class PromptSections:
    system: str
    path_context: str
    task: str
    output_schema: str

    def render(self) -> str:
        return "\n\n".join([
            f"[system]\n{self.system}",
            f"[path context]\n{self.path_context}",
            f"[task]\n{self.task}",
            f"[output schema]\n{self.output_schema}",
        ])


@dataclass(frozen=True)
class LlmAction:
    kind: str  # "Plan" | "Invoke"
    stage: str  # goal | query | mine | vis | report
    prompt: PromptSections
    schema_id: str
    # semantic payload: drives digests, transcript matching, synthesis, and
    # semantic validation; must be JSON-serializable.
    context: Mapping[str, Any] = field(default_factory=dict)

    def digest(self) -> str:
        canon = json.dumps(
            {"kind": self.kind, "stage": self.stage, "schema": self.schema_id,
             "context": self.context},
            sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


@dataclass
class ActionRecord:
    kind: str
    stage: str
    schema_id: str
    digest: str
    backend_id: str
    latency: float
    outcome: str  # Ok | SchemaError | TransportError
    attempt: int
    at: float = 0.0

    def to_dict(self) -> dict:
        return self.__dict__.copy()

    @classmethod
    def from_dict(cls, d: Mapping) -> "ActionRecord":
        return cls(**{k: d[k] for k in ("kind", "stage", "schema_id", "digest", "backend_id",
                                        "latency", "outcome", "attempt", "at")})


@dataclass
class MockReply:
    payload: dict | None
    latency: float
    transport_error: bool = False


def _stable_rng(*parts: object) -> random.Random:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


class ScriptedMock:
    """Deterministic transcript replay with layered matching.

    Resolution order per action: first transcript entry whose stage and
    match-pairs fit, then the stage default, then the schema-driven
    synthesizer. Error injection (rate p, seeded) is i.i.d. per attempt and
    alternates transport/schema failures.
    """

    backend_id = "mock"

    def __init__(self, transcript: Mapping | None = None, *, seed: int | None = None,
                 error_rate: float | None = None):
        t = dict(transcript or {})
        self.seed = seed if seed is not None else int(t.get("seed", 0))
        self.error_rate = error_rate if error_rate is not None else float(t.get("error_rate", 0.0))
        self.entries = [dict(e) for e in t.get("entries", ())]
        for e in self.entries:
            e.setdefault("max_uses", None)
            e.setdefault("uses", 0)
        self.stage_defaults = dict(t.get("stage_defaults", {}))
        self.synthesize = bool(t.get("synthesize", True))
        self._rng = random.Random(self.seed)

    @classmethod
    def from_file(cls, path) -> "ScriptedMock":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def reset(self) -> None:
        self._rng = random.Random(self.seed)
        for e in self.entries:
            e["uses"] = 0

    def _match_entry(self, action: LlmAction) -> dict | None:
        for e in self.entries:
            if e.get("stage") not in (None, action.stage):
                continue
            if e.get("kind") not in (None, action.kind):
                continue
            if e.get("schema_id") not in (None, action.schema_id):
                continue
            match: Mapping = e.get("match", {})
            if all(action.context.get(k) == v for k, v in match.items()):
                if e["max_uses"] is not None and e["uses"] >= e["max_uses"]:
                    continue
                e["uses"] += 1
                return e
        return None

    def respond(self, action: LlmAction, attempt: int) -> MockReply:
        u_latency = self._rng.random()
        u_err = self._rng.random()
        u_kind = self._rng.random()
        latency = round(0.3 + 1.4 * u_latency, 4)
        if u_err < self.error_rate:
            if u_kind < 0.5:
                return MockReply(payload=None, latency=latency, transport_error=True)
            return MockReply(payload={"___malformed___": True}, latency=latency)
        entry = self._match_entry(action)
        if entry is not None:
            return MockReply(payload=json.loads(json.dumps(entry["response"])), latency=latency)
        if action.stage in self.stage_defaults:
            return MockReply(payload=json.loads(json.dumps(self.stage_defaults[action.stage])),
                             latency=latency)
        if self.synthesize:
            return MockReply(payload=synthesize_response(action, self.seed), latency=latency)
        return MockReply(payload=None, latency=latency, transport_error=True)


def synthesize_response(action: LlmAction, seed: int) -> dict:
    """Deterministic, schema-valid response for an arbitrary action. Keyed by
    (seed, digest) so repeated identical actions get identical answers."""
    rng = _stable_rng(seed, action.digest())
    ctx = action.context
    sid = action.schema_id
    if sid == "direction_list":
        keys = [tuple(k) for k in ctx.get("valid_keys", ())]
        na = {tuple(k) for k in ctx.get("na_dynamic_keys", ())}
        implemented = [tuple(k) for k in ctx.get("implemented_keys", ())] or keys
        n = rng.randint(1, min(3, len(implemented))) if implemented else 0
        picked = rng.sample(sorted(implemented), n) if n else []
        directions = []
        for key in picked:
            temporality = "Static"
            if key not in na and rng.random() < 0.3:
                temporality = "Dynamic"
            directions.append({
                "entity": key[0], "scope": key[1], "name": key[2],
                "temporality": temporality,
                "rationale": f"goal matches {key[2].lower()} characteristics",
            })
        return {"directions": directions}
    if sid == "query_chain":
        entity = ctx.get("entity", "UGC")
        if entity == "User":
            dsl = "users | traverse(follows, both) | expand(posts)"
        else:
            dsl = f"posts | top_k({rng.choice([200, 300, 400])}, like_count) | expand(users)"
        return {"dsl": dsl, "rationale": "locate a workable data subset", "refine": False}
    if sid == "method_choice":
        allowed = sorted(ctx.get("allowed_methods", ())) or ["time_binning"]
        suggested = [m for m in ctx.get("suggested_methods", ()) if m in allowed]
        pool = suggested or allowed
        return {"method_id": rng.choice(sorted(pool)), "rationale": "fits the insight type"}
    if sid == "rubric_score":
        return {"score": round(0.4 + 0.55 * rng.random(), 3), "rationale": "plausible result"}
    if sid == "viz_rubric":
        return {"quality": round(0.5 + 0.45 * rng.random(), 3),
                "alignment": round(0.5 + 0.45 * rng.random(), 3),
                "rationale": "readable encoding"}
    if sid == "report_items":
        viz_ids = list(ctx.get("viz_ids", ()))[:3] or ["viz-unknown"]
        return {"items": [{
            "who": "active users in the subset",
            "what": "the dominant pattern in the selected views",
            "when": ctx.get("time_hint") or None,
            "where": None,
            "why": "signal concentrated in a few dimensions",
            "narrative": "The selected views point to one dominant pattern.",
            "view_refs": viz_ids,
        }]}
    if sid == "interpretation":
        return {"reasons": "result consistent with the stage input",
                "evaluation": "scores within the acceptable band",
                "next": "proceed to the next stage"}
    raise SchemaValidationError(f"no synthesizer for schema {sid!r}")


class RemoteHttp:
    """Chat-completion style backend. The auth token is resolved from an
    environment variable at call time and never stored or logged."""

    def __init__(self, endpoint: str, model: str, auth_env: str = "",
                 timeout: float = 30.0, backend_id: str | None = None):
        self.endpoint = endpoint
        self.model = model
        self.auth_env = auth_env
        self.timeout = timeout
        self.backend_id = backend_id or f"remote:{model}"

    def __repr__(self) -> str:
        return f"RemoteHttp(endpoint={self.endpoint!r}, model={self.model!r})"

    def respond(self, action: LlmAction, attempt: int) -> MockReply:
        import httpx

        headers = {"content-type": "application/json"}
        token = os.environ.get(self.auth_env, "") if self.auth_env else ""
        if token:
            headers["authorization"] = f"Bearer {token}"
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": action.prompt.system},
                {"role": "user", "content": action.prompt.render()},
            ],
            "response_format": {"type": "json_object"},
        }
        t0 = time.monotonic()
        try:
            resp = httpx.post(self.endpoint, json=body, headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            content = resp.json()["choices"][0]["message"]["content"]
            payload = json.loads(content)
        except (json.JSONDecodeError, KeyError, IndexError):
            return MockReply(payload={"___malformed___": True},
                             latency=time.monotonic() - t0)
        except Exception as exc:
            raise TransportError(str(exc)) from exc
        return MockReply(payload=payload, latency=time.monotonic() - t0)


class Gateway:
    """Validated calls with retries; one ActionRecord per attempt."""

    def __init__(self, backend, *, max_retries: int = 2,
                 clock: Callable[[], float] = time.time):
        self.backend = backend
        self.max_retries = max_retries
        self.clock = clock
        self.records: list[ActionRecord] = []

    def call(self, action: LlmAction) -> dict:
        if action.schema_id not in JSON_SCHEMAS:
            raise SchemaValidationError(f"unknown schema {action.schema_id!r}")
        last_error: Exception | None = None
        for attempt in range(1, self.max_retries + 2):
            outcome = "Ok"
            payload: dict | None = None
            latency = 0.0
            try:
                reply = self.backend.respond(action, attempt)
                latency = reply.latency
                if reply.transport_error:
                    raise TransportError("backend transport failure")
                payload = reply.payload
                validate_response(action.schema_id, payload, action.context)
            except TransportError as exc:
                outcome, last_error = "TransportError", exc
            except SchemaValidationError as exc:
                outcome, last_error = "SchemaError", exc
            self.records.append(ActionRecord(
                kind=action.kind, stage=action.stage, schema_id=action.schema_id,
                digest=action.digest(), backend_id=self.backend.backend_id,
                latency=latency, outcome=outcome, attempt=attempt, at=self.clock(),
            ))
            if outcome == "Ok":
                assert payload is not None
                return payload
        raise GatewayExhaustedError(
            f"action {action.stage}/{action.schema_id} failed after "
            f"{self.max_retries + 1} attempts: {last_error}",
            attempts=self.max_retries + 1)

    def dump_records(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for r in self.records:
                fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")


def load_records(path) -> list[ActionRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(ActionRecord.from_dict(json.loads(line)))
    return out


def metrics_summary(records: list[ActionRecord]) -> dict[str, dict]:
    """Per action kind: mean/std of attempt latencies (population std, so
    {1.0, 3.0} gives exactly 1.0), the first-attempt error rate, and counts."""
    out: dict[str, dict] = {}
    for kind in sorted({r.kind for r in records}):
        rs = [r for r in records if r.kind == kind]
        lats = [r.latency for r in rs]
        mean = sum(lats) / len(lats)
        std = 0.0
        if len(lats) > 1:
            std = math.sqrt(sum((x - mean) ** 2 for x in lats) / len(lats))
        first = [r for r in rs if r.attempt == 1]
        errors = sum(1 for r in first if r.outcome != "Ok")
        out[kind] = {
            "mean_latency": mean,
            "std_latency": std,
            "error_rate": errors / len(first) if first else 0.0,
            "actions": len(first),
            "attempts": len(rs),
        }
    return out
