"""Machine-readable insight taxonomy and the direction matching it drives.

The taxonomy ships as a versioned data file so domain experts can extend
rows without touching code. Each row pairs an entity scope with static and
dynamic mining methods plus visualization hints; direction matching asks the
LLM to rank rows against a user goal and validates every answer against the
loaded index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .errors import MethodNotAvailableError, TaxonomyError
from .gateway import Gateway, LlmAction, PromptSections

ENTITIES = ("User", "UGC")
SCOPES = ("Single", "Group")
TEMPORALITIES = ("Static", "Dynamic")
VIZ_TYPES = ("WordCloud", "LineChart", "BarChart", "ForceGraph", "ParallelCoordinates")

Key = tuple[str, str, str]  # (entity, scope, name)


@dataclass(frozen=True)
class MethodRef:
    method_id: str
    implemented: bool
    u_method: float
    impl: str | None = None  # mining-registry id this row maps to

    def __post_init__(self):
        if not 0.0 <= self.u_method <= 1.0:
            raise TaxonomyError(f"u_method out of [0,1]: {self.u_method}")


@dataclass(frozen=True)
class InsightType:
    entity: str
    scope: str
    name: str
    gloss: str
    static_methods: tuple[MethodRef, ...]
    dynamic_methods: tuple[MethodRef, ...]
    na_reason: str | None
    viz_hints: tuple[str, ...]

    @property
    def key(self) -> Key:
        return (self.entity, self.scope, self.name)


@dataclass(frozen=True)
class Direction:
    insight: InsightType
    temporality: str
    rationale: str
    rank: int

    def __post_init__(self):
        if self.temporality not in TEMPORALITIES:
            raise TaxonomyError(f"bad temporality {self.temporality!r}")
        if self.rank < 1:
            raise TaxonomyError(f"rank must be positive, got {self.rank}")


@dataclass
class TaxonomyIndex:
    version: int
    rows: dict[Key, InsightType] = field(default_factory=dict)

    def get(self, entity: str, scope: str, name: str) -> InsightType:
        try:
            return self.rows[(entity, scope, name)]
        except KeyError:
            raise TaxonomyError(f"no insight type ({entity}, {scope}, {name})") from None

    def keys(self) -> list[Key]:
        return sorted(self.rows)

    def __len__(self) -> int:
        return len(self.rows)


def _parse_method(raw: Mapping, registered: Iterable[str]) -> MethodRef:
    impl = raw.get("impl")
    implemented = impl is not None and impl in set(registered)
    return MethodRef(
        method_id=str(raw["method_id"]),
        implemented=implemented,
        u_method=float(raw.get("u_method", 0.5)),
        impl=impl if implemented else None,
    )


def load_taxonomy(source: str | Path | Mapping | None = None,
                  registered_methods: Iterable[str] | None = None) -> TaxonomyIndex:
    """Load and validate a taxonomy document (default: the bundled file).

    Errors: unknown entity/scope values, duplicate insight-type names,
    N/A rows without a reason.
    """
    if registered_methods is None:
        from .mining import registered_method_ids
        registered_methods = registered_method_ids()
    if source is None:
        doc = json.loads(resources.files("agentsight.data")
                         .joinpath("taxonomy.json").read_text("utf-8"))
    elif isinstance(source, Mapping):
        doc = source
    else:
        doc = json.loads(Path(source).read_text("utf-8"))

    index = TaxonomyIndex(version=int(doc.get("version", 0)))
    for raw in doc.get("insight_types", ()):
        entity, scope, name = raw.get("entity"), raw.get("scope"), raw.get("name")
        if entity not in ENTITIES:
            raise TaxonomyError(f"unknown entity {entity!r} in row {name!r}")
        if scope not in SCOPES:
            raise TaxonomyError(f"unknown scope {scope!r} in row {name!r}")
        key = (entity, scope, str(name))
        if key in index.rows:
            raise TaxonomyError(f"duplicate insight type {key}")
        static = tuple(_parse_method(m, registered_methods) for m in raw.get("static_methods", ()))
        dynamic = tuple(_parse_method(m, registered_methods) for m in raw.get("dynamic_methods", ()))
        na_reason = raw.get("na_reason")
        if not static:
            raise TaxonomyError(f"{key}: static_methods must be non-empty")
        if not dynamic and not na_reason:
            raise TaxonomyError(f"{key}: empty dynamic_methods requires na_reason")
        if dynamic and na_reason:
            raise TaxonomyError(f"{key}: na_reason given but dynamic_methods non-empty")
        hints = tuple(raw.get("viz_hints", ()))
        for h in hints:
            if h not in VIZ_TYPES:
                raise TaxonomyError(f"{key}: unknown viz hint {h!r}")
        index.rows[key] = InsightType(
            entity=entity, scope=scope, name=str(name), gloss=str(raw.get("gloss", "")),
            static_methods=static, dynamic_methods=dynamic,
            na_reason=na_reason, viz_hints=hints,
        )
    return index


def methods_for(index: TaxonomyIndex, key: Key, temporality: str) -> tuple[MethodRef, ...]:
    """Pure lookup of the method cell, in authored order. Raises
    MethodNotAvailableError (carrying na_reason) for N/A dynamic cells."""
    row = index.get(*key)
    if temporality == "Static":
        return row.static_methods
    if temporality != "Dynamic":
        raise TaxonomyError(f"unknown temporality {temporality!r}")
    if not row.dynamic_methods:
        reason = row.na_reason or "not applicable"
        raise MethodNotAvailableError(
            f"{row.name} has no dynamic methods: {reason}", na_reason=reason)
    return row.dynamic_methods


def _direction_context(index: TaxonomyIndex, goal: str) -> dict:
    na_dynamic = [list(k) for k, row in sorted(index.rows.items()) if not row.dynamic_methods]
    implemented = [
        list(k) for k, row in sorted(index.rows.items())
        if any(m.implemented for m in row.static_methods + row.dynamic_methods)
    ]
    return {
        "goal": goal,
        "valid_keys": [list(k) for k in index.keys()],
        "na_dynamic_keys": na_dynamic,
        "implemented_keys": implemented,
    }


def build_direction_action(goal: str, index: TaxonomyIndex,
                           path_context: str = "(session start)") -> LlmAction:
    rows_desc = "\n".join(
        f"- entity={r.entity} scope={r.scope} name={r.name!r}: {r.gloss}"
        + ("" if r.dynamic_methods else " [static only]")
        for r in (index.rows[k] for k in index.keys())
    )
    prompt = PromptSections(
        system="You plan social-media analyses by mapping goals onto a fixed insight taxonomy.",
        path_context=path_context,
        task=(f"Goal: {goal}\n\nRank up to 5 exploration directions from these "
              f"insight types (best first). Abstain with an empty list when "
              f"nothing fits.\n{rows_desc}"),
        output_schema=json.dumps({"directions": [
            {"entity": "...", "scope": "...", "name": "...",
             "temporality": "Static|Dynamic", "rationale": "..."}]}),
    )
    return LlmAction(kind="Plan", stage="goal", prompt=prompt, schema_id="direction_list",
                     context=_direction_context(index, goal))


def match_directions(goal: str, index: TaxonomyIndex, llm: Gateway) -> list[Direction]:
    """Decompose a goal into 0..5 ranked directions. Rank is the position in
    the validated LLM response; every direction references an existing row."""
    if not goal.strip():
        raise TaxonomyError("empty goal")
    response = llm.call(build_direction_action(goal, index))
    directions = []
    for i, d in enumerate(response["directions"]):
        row = index.get(d["entity"], d["scope"], d["name"])
        directions.append(Direction(
            insight=row, temporality=d["temporality"],
            rationale=d["rationale"], rank=i + 1,
        ))
    return directions
