"""Miner registry: method ids, parameter schemas, runners, result checks.

Every miner is pure given (data, params); stochastic ones always carry a
seed in their validated params. M(data, method, params) -> result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping

from ..errors import MiningError
from . import dynamic, graph, text, timeseries, topics
from .assemble import INPUT_CLASS, assemble
from .types import (AssembledData, ChangePoints, DocTermMatrix, LabeledTexts,
                    MiningResult, Partition, PhaseSeries, ResultPayload, ScoreMap,
                    SentimentDist, StanceDist, TimeSeries, TopicSet, WeightedGraph)

_PAYLOAD_TYPES = {
    "DocTermMatrix": DocTermMatrix,
    "WeightedGraph": WeightedGraph,
    "TimeSeries": TimeSeries,
    "LabeledTexts": LabeledTexts,
}


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: str  # int | float | str | bool
    default: Any = None  # None means required
    minimum: float | None = None
    maximum: float | None = None
    choices: tuple | None = None
    required: bool = False


@dataclass(frozen=True)
class MinerSpec:
    method_id: str
    input_class: str
    stochastic: bool
    params: tuple[ParamSpec, ...]
    run: Callable[[Any, dict], tuple[ResultPayload, bool, int]]


def _coerce(spec: ParamSpec, value):
    if spec.type == "int":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise MiningError(f"param {spec.name!r} expects an integer, got {value!r}")
        value = int(value)
    elif spec.type == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise MiningError(f"param {spec.name!r} expects a number, got {value!r}")
        value = float(value)
    elif spec.type == "bool":
        if not isinstance(value, bool):
            raise MiningError(f"param {spec.name!r} expects a bool, got {value!r}")
    elif spec.type == "str":
        if not isinstance(value, str):
            raise MiningError(f"param {spec.name!r} expects a string, got {value!r}")
    if spec.minimum is not None and value < spec.minimum:
        raise MiningError(f"param {spec.name!r} below minimum {spec.minimum}: {value}")
    if spec.maximum is not None and value > spec.maximum:
        raise MiningError(f"param {spec.name!r} above maximum {spec.maximum}: {value}")
    if spec.choices is not None and value not in spec.choices:
        raise MiningError(f"param {spec.name!r} must be one of {spec.choices}, got {value!r}")
    return value


def validate_params(method_id: str, raw: Mapping[str, Any]) -> dict[str, Any]:
    spec = get_method(method_id)
    known = {p.name for p in spec.params}
    unknown = set(raw) - known
    if unknown:
        raise MiningError(f"unknown params for {method_id}: {sorted(unknown)}")
    out: dict[str, Any] = {}
    for p in spec.params:
        if p.name in raw and raw[p.name] is not None:
            out[p.name] = _coerce(p, raw[p.name])
        elif p.required:
            raise MiningError(f"{method_id} requires param {p.name!r}")
        elif p.default is not None or p.name == "seed":
            out[p.name] = p.default if p.default is not None else 0
    if spec.stochastic and "seed" not in out:
        out["seed"] = 0
    return out


def _run_lda(payload: DocTermMatrix, p: dict):
    ts = topics.run_lda(payload, k=p["k"], alpha=p["alpha"], beta=p["beta"],
                        iterations=p["iterations"], seed=p["seed"])
    return ts, True, p["iterations"]


def _run_louvain(payload: WeightedGraph, p: dict):
    part = graph.louvain(payload, resolution=p["resolution"], seed=p["seed"])
    return part, True, len(part.pass_modularities)


def _run_pagerank(payload: WeightedGraph, p: dict):
    scores, converged, iters = graph.pagerank(
        payload, damping=p["damping"], tol=p["tol"], max_iter=p["max_iter"])
    return scores, converged, iters


def _run_betweenness(payload: WeightedGraph, p: dict):
    return graph.betweenness(payload, normalized=p["normalized"]), True, 0


def _run_kcore(payload: WeightedGraph, p: dict):
    return graph.kcore(payload), True, 0


def _run_sentiment(payload: LabeledTexts, p: dict):
    return text.lexicon_sentiment(payload), True, 0


def _run_stance(payload: LabeledTexts, p: dict):
    return text.keyword_stance(payload, lexicon_name=p["lexicon"]), True, 0


def _bin_factor(bin_name: str) -> int:
    return {"day": 1, "week": 7}[bin_name]


def _run_time_binning(payload: TimeSeries, p: dict):
    return timeseries.rebin(payload, _bin_factor(p["bin"])), True, 0


def _run_change_point(payload: TimeSeries, p: dict):
    series = timeseries.rebin(payload, _bin_factor(p["bin"]))
    max_cp = p.get("max_changepoints")
    cp = timeseries.change_point(series, penalty=p["penalty"],
                                 min_segment=p["min_segment"],
                                 max_changepoints=max_cp)
    return cp, True, len(cp.indices)


def _run_dynamic_topics(payload: DocTermMatrix, p: dict):
    return dynamic.dynamic_topic_modeling(
        payload, bin=p["bin"], penalty=p["penalty"], min_segment=p["min_segment"],
        max_changepoints=p.get("max_changepoints"), k=p["k"], alpha=p["alpha"],
        beta=p["beta"], iterations=p["iterations"], seed=p["seed"])


def _run_dynamic_communities(payload: WeightedGraph, p: dict):
    return dynamic.dynamic_community_detection(
        payload, phases=p["phases"], resolution=p["resolution"], seed=p["seed"])


_LDA_PARAMS = (
    ParamSpec("k", "int", default=5, minimum=1, maximum=100),
    ParamSpec("alpha", "float", default=0.1, minimum=1e-6),
    ParamSpec("beta", "float", default=0.01, minimum=1e-6),
    ParamSpec("iterations", "int", default=60, minimum=1),
    ParamSpec("seed", "int", default=0),
)

_REGISTRY: dict[str, MinerSpec] = {}


def _register(spec: MinerSpec) -> None:
    _REGISTRY[spec.method_id] = spec


_register(MinerSpec("lda_topics", "DocTermMatrix", True, _LDA_PARAMS, _run_lda))
_register(MinerSpec("louvain_communities", "WeightedGraph", True, (
    ParamSpec("resolution", "float", default=1.0, minimum=1e-3),
    ParamSpec("seed", "int", default=0),
), _run_louvain))
_register(MinerSpec("pagerank", "WeightedGraph", False, (
    ParamSpec("damping", "float", default=0.85, minimum=0.0, maximum=1.0),
    ParamSpec("tol", "float", default=1e-10, minimum=0.0),
    ParamSpec("max_iter", "int", default=500, minimum=1),
), _run_pagerank))
_register(MinerSpec("betweenness", "WeightedGraph", False, (
    ParamSpec("normalized", "bool", default=True),
), _run_betweenness))
_register(MinerSpec("kcore", "WeightedGraph", False, (), _run_kcore))
_register(MinerSpec("lexicon_sentiment", "LabeledTexts", False, (), _run_sentiment))
_register(MinerSpec("keyword_stance", "LabeledTexts", False, (
    ParamSpec("lexicon", "str", default="default"),
), _run_stance))
_register(MinerSpec("time_binning", "TimeSeries", False, (
    ParamSpec("bin", "str", default="week", choices=("day", "week")),
), _run_time_binning))
_register(MinerSpec("change_point", "TimeSeries", False, (
    ParamSpec("bin", "str", default="week", choices=("day", "week")),
    ParamSpec("penalty", "float", default=0.0, minimum=0.0),
    ParamSpec("min_segment", "int", default=2, minimum=1),
    ParamSpec("max_changepoints", "int", minimum=1),
), _run_change_point))
_register(MinerSpec("dynamic_topic_modeling", "DocTermMatrix", True, _LDA_PARAMS + (
    ParamSpec("bin", "str", default="week", choices=("day", "week")),
    ParamSpec("penalty", "float", default=0.0, minimum=0.0),
    ParamSpec("min_segment", "int", default=2, minimum=1),
    ParamSpec("max_changepoints", "int", minimum=1),
), _run_dynamic_topics))
_register(MinerSpec("dynamic_community_detection", "WeightedGraph", True, (
    ParamSpec("phases", "int", default=3, minimum=1),
    ParamSpec("resolution", "float", default=1.0, minimum=1e-3),
    ParamSpec("seed", "int", default=0),
), _run_dynamic_communities))


def registered_method_ids() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def get_method(method_id: str) -> MinerSpec:
    try:
        return _REGISTRY[method_id]
    except KeyError:
        raise MiningError(f"method {method_id!r} is not registered") from None


def _check_distribution(row, what: str, tol: float = 1e-9) -> None:
    total = sum(row)
    if abs(total - 1.0) > tol:
        raise MiningError(f"{what} sums to {total!r}, expected 1")


def validate_result(result: MiningResult) -> None:
    payload = result.payload
    if isinstance(payload, TopicSet):
        for i, row in enumerate(payload.topic_word):
            _check_distribution(row, f"topic_word[{i}]")
        for i, row in enumerate(payload.doc_topic):
            _check_distribution(row, f"doc_topic[{i}]")
    elif isinstance(payload, SentimentDist):
        _check_distribution((payload.positive, payload.negative, payload.neutral),
                            "sentiment fractions")
    elif isinstance(payload, StanceDist):
        _check_distribution(tuple(payload.fractions.values()), "stance fractions")
    elif isinstance(payload, PhaseSeries):
        for ph in payload.phases:
            validate_result(MiningResult(method_id=result.method_id, params=result.params,
                                         payload=ph.payload))
    # ChangePoints validates its own indices on construction


def run_miner(data: AssembledData, method_id: str, params: Mapping[str, Any]) -> MiningResult:
    """Deterministic given (data, validated params, seed)."""
    spec = get_method(method_id)
    expected = _PAYLOAD_TYPES[spec.input_class]
    if not isinstance(data.payload, expected):
        raise MiningError(
            f"{method_id} expects {spec.input_class}, got {type(data.payload).__name__}")
    validated = validate_params(method_id, params)
    payload, converged, iterations = spec.run(data.payload, validated)
    result = MiningResult(
        method_id=method_id,
        params=validated,
        payload=payload,
        provenance=dict(data.meta),
        converged=converged,
        iterations=iterations,
    )
    validate_result(result)
    return result


__all__ = [
    "AssembledData", "ChangePoints", "DocTermMatrix", "LabeledTexts", "MinerSpec",
    "MiningResult", "ParamSpec", "Partition", "PhaseSeries", "ScoreMap",
    "SentimentDist", "StanceDist", "TimeSeries", "TopicSet", "WeightedGraph",
    "assemble", "INPUT_CLASS", "get_method", "registered_method_ids",
    "run_miner", "validate_params", "validate_result",
]
