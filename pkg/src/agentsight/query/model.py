"""Chain-query AST, attribute registry, static validation, pretty-printer.

A chain is a pipe-separated sequence of steps; the output subset of each step
feeds the next. The canonical text form emitted by :func:`pretty_print`
reparses to an equal chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

from ..datastore import EdgeKind, Modality, format_utc
from ..errors import QueryValidationError


class Op(str, Enum):
    FILTER_ATTR = "FilterAttr"
    TEXT_SEARCH = "TextSearch"
    TIME_WINDOW = "TimeWindow"
    TRAVERSE_EDGE = "TraverseEdge"
    EXPAND_MODALITY = "ExpandModality"
    SAMPLE_TOP_K = "SampleTopK"


# attribute -> (modality, python type); created_at is reachable via
# time_window (X) and as a top_k order key, not via filter.
FILTER_ATTRS: dict[str, tuple[Modality, type]] = {
    "follower_count": (Modality.T, int),
    "following_count": (Modality.T, int),
    "verified": (Modality.T, bool),
    "description": (Modality.T, str),
    "like_count": (Modality.X, int),
    "retweet_count": (Modality.X, int),
    "reply_count": (Modality.X, int),
    "author_id": (Modality.X, str),
}

ORDER_KEYS: dict[str, Modality] = {
    "follower_count": Modality.T,
    "following_count": Modality.T,
    "like_count": Modality.X,
    "retweet_count": Modality.X,
    "reply_count": Modality.X,
    "created_at": Modality.X,
}

COMPARATORS = (">", ">=", "<", "<=", "=", "!=")

_KIND_SRC: dict[EdgeKind, Modality] = {
    EdgeKind.FOLLOWS: Modality.T,
    EdgeKind.POSTS: Modality.T,
    EdgeKind.RETWEETS: Modality.T,
    EdgeKind.REPLIES: Modality.X,
    EdgeKind.MENTIONS: Modality.X,
}
_KIND_DST: dict[EdgeKind, Modality] = {
    EdgeKind.FOLLOWS: Modality.T,
    EdgeKind.POSTS: Modality.X,
    EdgeKind.RETWEETS: Modality.X,
    EdgeKind.REPLIES: Modality.X,
    EdgeKind.MENTIONS: Modality.T,
}


def traverse_endpoints(kind: EdgeKind, direction: str) -> tuple[set[Modality], set[Modality]]:
    """(required input modalities - any one suffices, produced modalities)."""
    src, dst = _KIND_SRC[kind], _KIND_DST[kind]
    if direction == "out":
        return {src}, {dst, Modality.N}
    if direction == "in":
        return {dst}, {src, Modality.N}
    return {src, dst}, {src, dst, Modality.N}


@dataclass(frozen=True)
class SourceAll:
    def label(self) -> str:
        return "all"


@dataclass(frozen=True)
class SourceNode:
    node_id: str

    def label(self) -> str:
        return f"node {self.node_id}"


Source = SourceAll | SourceNode


@dataclass(frozen=True)
class QueryStep:
    operation: Op
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "params", dict(self.params))
        _validate_params(self)

    def __eq__(self, other):
        return (isinstance(other, QueryStep)
                and self.operation == other.operation
                and dict(self.params) == dict(other.params))

    def __hash__(self):
        return hash((self.operation, tuple(sorted(self.params.items(), key=lambda kv: kv[0]))))


def _validate_params(step: QueryStep) -> None:
    p = step.params
    op = step.operation
    if op is Op.FILTER_ATTR:
        attr, cmp_, value = p.get("attr"), p.get("cmp"), p.get("value")
        if attr not in FILTER_ATTRS:
            raise QueryValidationError(f"unknown attribute {attr!r}", -1)
        if cmp_ not in COMPARATORS:
            raise QueryValidationError(f"unknown comparator {cmp_!r}", -1)
        modality, typ = FILTER_ATTRS[attr]
        if typ in (str, bool) and cmp_ not in ("=", "!="):
            raise QueryValidationError(f"{attr} supports only = and !=", -1)
        if not isinstance(value, typ) or (typ is int and isinstance(value, bool)):
            raise QueryValidationError(f"{attr} expects {typ.__name__}, got {value!r}", -1)
    elif op is Op.TEXT_SEARCH:
        terms = p.get("terms")
        if not terms or not all(isinstance(t, str) and t for t in terms):
            raise QueryValidationError("text_search needs at least one non-empty term", -1)
        p["terms"] = tuple(terms)
    elif op is Op.TIME_WINDOW:
        start, end = p.get("start"), p.get("end")
        if not isinstance(start, (int, float)) or not isinstance(end, (int, float)) or start >= end:
            raise QueryValidationError("time_window needs start < end", -1)
    elif op is Op.TRAVERSE_EDGE:
        kind = p.get("kind")
        if not isinstance(kind, EdgeKind):
            raise QueryValidationError(f"unknown edge kind {kind!r}", -1)
        if p.setdefault("direction", "out") not in ("out", "in", "both"):
            raise QueryValidationError(f"bad direction {p['direction']!r}", -1)
        p.setdefault("hops", 1)
        if p["hops"] != 1:
            raise QueryValidationError("only single-hop traversal is supported", -1)
    elif op is Op.EXPAND_MODALITY:
        if not isinstance(p.get("target"), Modality):
            raise QueryValidationError(f"bad target modality {p.get('target')!r}", -1)
        if p.setdefault("scope", "linked") not in ("universe", "linked"):
            raise QueryValidationError(f"bad expand scope {p['scope']!r}", -1)
    elif op is Op.SAMPLE_TOP_K:
        k, key = p.get("k"), p.get("order_key")
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise QueryValidationError(f"top_k needs a positive k, got {k!r}", -1)
        if key not in ORDER_KEYS:
            raise QueryValidationError(f"unknown order key {key!r}", -1)
        p.setdefault("descending", True)


def step_io(step: QueryStep) -> tuple[set[Modality], set[Modality]]:
    """(required modalities - any one suffices, modalities the step populates)."""
    p = step.params
    if step.operation is Op.FILTER_ATTR:
        m = FILTER_ATTRS[p["attr"]][0]
        return {m}, set()
    if step.operation is Op.TEXT_SEARCH or step.operation is Op.TIME_WINDOW:
        return {Modality.X}, set()
    if step.operation is Op.TRAVERSE_EDGE:
        return traverse_endpoints(p["kind"], p["direction"])
    if step.operation is Op.EXPAND_MODALITY:
        if p["scope"] == "universe":
            return set(), {p["target"]}
        return {Modality.T, Modality.X, Modality.N}, {p["target"]}
    m = ORDER_KEYS[p["order_key"]]
    return {m}, set()


@dataclass(frozen=True)
class QueryChain:
    steps: tuple[QueryStep, ...]
    source: Source = SourceAll()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise QueryValidationError("empty chain", 0)
        validate_chain(self)


def validate_chain(chain: QueryChain) -> None:
    """Static check: each step's required input modality is producible by
    its predecessors. Raises naming the offending step index."""
    available: set[Modality] = set(Modality) if isinstance(chain.source, SourceNode) else set()
    for i, step in enumerate(chain.steps):
        if (step.operation is Op.EXPAND_MODALITY and step.params["scope"] == "universe"
                and (i != 0 or not isinstance(chain.source, SourceAll))):
            raise QueryValidationError(
                "modality selector is only valid as the first step of an all-source chain", i)
        required, produced = step_io(step)
        if step.operation is Op.EXPAND_MODALITY and step.params["scope"] == "linked":
            if not available:
                raise QueryValidationError("expand needs a populated input subset", i)
        elif required and not (required & available):
            names = "/".join(sorted(m.value for m in required))
            raise QueryValidationError(
                f"step requires modality {names} which no earlier step produces", i)
        available |= produced


def _fmt_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return repr(value)


_MODALITY_KW = {Modality.T: "users", Modality.X: "posts", Modality.N: "edges"}


def pretty_step(step: QueryStep) -> str:
    p = step.params
    if step.operation is Op.FILTER_ATTR:
        return f"filter({p['attr']} {p['cmp']} {_fmt_value(p['value'])})"
    if step.operation is Op.TEXT_SEARCH:
        return "text_search(" + ", ".join(_fmt_value(t) for t in p["terms"]) + ")"
    if step.operation is Op.TIME_WINDOW:
        return f"time_window({format_utc(p['start'])}, {format_utc(p['end'])})"
    if step.operation is Op.TRAVERSE_EDGE:
        if p["direction"] == "out":
            return f"traverse({p['kind'].value})"
        return f"traverse({p['kind'].value}, {p['direction']})"
    if step.operation is Op.EXPAND_MODALITY:
        kw = _MODALITY_KW[p["target"]]
        return kw if p["scope"] == "universe" else f"expand({kw})"
    if p["descending"]:
        return f"top_k({p['k']}, {p['order_key']})"
    return f"top_k({p['k']}, {p['order_key']}, asc)"


def pretty_print(chain: QueryChain) -> str:
    """Canonical single-line form; used as the Agent Tree node label."""
    prefix = ""
    if isinstance(chain.source, SourceNode):
        prefix = f"from_node({_fmt_value(chain.source.node_id)}) | "
    return prefix + " | ".join(pretty_step(s) for s in chain.steps)
