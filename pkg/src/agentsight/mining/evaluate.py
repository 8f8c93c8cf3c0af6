"""Result evaluation: stability, quality metric, LLM assessment, and the
weighted combinations

    e_m = w_stab * s_stab + w_metric * s_metric + w_llm * s_llm
    u_m = w_method * u_method + w_eval * (1 - e_m)

Stability re-runs the miner across three derived seeds and measures
agreement (matched topic cosine for LDA, adjusted Rand for partitions,
exact equality for deterministic methods)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..errors import ConfigError, GatewayError, MiningError
from ..gateway import Gateway, LlmAction, PromptSections
from . import get_method, run_miner
from .types import (AssembledData, ChangePoints, MiningResult, Partition,
                    PhaseSeries, ScoreMap, SentimentDist, StanceDist, TimeSeries,
                    TopicSet, derive_seed)


@dataclass(frozen=True)
class EvalWeights:
    """(w_stab, w_metric, w_llm) must sum to 1; so must (w_method, w_eval)."""

    w_stab: float = 0.5
    w_metric: float = 0.3
    w_llm: float = 0.2
    w_method: float = 0.5
    w_eval: float = 0.5

    def __post_init__(self):
        for name in ("w_stab", "w_metric", "w_llm", "w_method", "w_eval"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if abs(self.w_stab + self.w_metric + self.w_llm - 1.0) > 1e-9:
            raise ConfigError("mining weights (stability, metric, llm) must sum to 1")
        if abs(self.w_method + self.w_eval - 1.0) > 1e-9:
            raise ConfigError("uncertainty weights must sum to 1")


@dataclass(frozen=True)
class EvalScores:
    s_stab: float
    s_metric: float
    s_llm: float
    e_m: float
    u_method: float
    u_m: float
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "s_stab": self.s_stab, "s_metric": self.s_metric, "s_llm": self.s_llm,
            "e_m": self.e_m, "u_method": self.u_method, "u_m": self.u_m,
            "flags": list(self.flags),
        }


def combine_scores(s_stab: float, s_metric: float, s_llm: float, u_method: float,
                   weights: EvalWeights, flags: tuple[str, ...] = ()) -> EvalScores:
    e_m = weights.w_stab * s_stab + weights.w_metric * s_metric + weights.w_llm * s_llm
    u_m = weights.w_method * u_method + weights.w_eval * (1.0 - e_m)
    return EvalScores(s_stab=s_stab, s_metric=s_metric, s_llm=s_llm,
                      e_m=e_m, u_method=u_method, u_m=u_m, flags=flags)


# -- agreement measures ------------------------------------------------------

def topic_agreement(a: TopicSet, b: TopicSet) -> float:
    """Mean cosine between optimally matched topic-word rows."""
    wa = np.asarray(a.topic_word)
    wb = np.asarray(b.topic_word)
    if wa.shape != wb.shape:
        return 0.0
    na = wa / np.linalg.norm(wa, axis=1, keepdims=True)
    nb = wb / np.linalg.norm(wb, axis=1, keepdims=True)
    sim = na @ nb.T
    rows, cols = linear_sum_assignment(-sim)
    return float(np.clip(sim[rows, cols].mean(), 0.0, 1.0))


def adjusted_rand(labels_a: Sequence[int], labels_b: Sequence[int]) -> float:
    if len(labels_a) != len(labels_b):
        raise MiningError("label vectors differ in length")
    n = len(labels_a)
    if n == 0:
        return 1.0
    table: dict[tuple[int, int], int] = {}
    count_a: dict[int, int] = {}
    count_b: dict[int, int] = {}
    for x, y in zip(labels_a, labels_b):
        table[(x, y)] = table.get((x, y), 0) + 1
        count_a[x] = count_a.get(x, 0) + 1
        count_b[y] = count_b.get(y, 0) + 1

    def comb2(v: int) -> float:
        return v * (v - 1) / 2.0

    sum_cells = sum(comb2(v) for v in table.values())
    sum_a = sum(comb2(v) for v in count_a.values())
    sum_b = sum(comb2(v) for v in count_b.values())
    total = comb2(n)
    expected = sum_a * sum_b / total if total else 0.0
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        return 1.0
    return (sum_cells - expected) / (max_index - expected)


def _payload_agreement(a, b) -> float:
    if isinstance(a, TopicSet) and isinstance(b, TopicSet):
        return topic_agreement(a, b)
    if isinstance(a, Partition) and isinstance(b, Partition):
        return max(0.0, adjusted_rand(a.labels, b.labels))
    if isinstance(a, PhaseSeries) and isinstance(b, PhaseSeries):
        if len(a.phases) != len(b.phases):
            return 0.0
        vals = [_payload_agreement(pa.payload, pb.payload)
                for pa, pb in zip(a.phases, b.phases)]
        return sum(vals) / len(vals)
    return 1.0 if a == b else 0.0


def stability_score(data: AssembledData, method_id: str, params: Mapping,
                    n_seeds: int = 3) -> float:
    """Pairwise agreement across `n_seeds` re-runs with derived seeds.
    Deterministic methods re-run with identical params and must agree
    exactly. Same inputs always yield the same score."""
    spec = get_method(method_id)
    runs = []
    base_seed = int(params.get("seed", 0))
    for i in range(n_seeds):
        p = dict(params)
        if spec.stochastic:
            p["seed"] = derive_seed(base_seed, i + 1)
        runs.append(run_miner(data, method_id, p).payload)
    pairs = [(i, j) for i in range(n_seeds) for j in range(i + 1, n_seeds)]
    return sum(_payload_agreement(runs[i], runs[j]) for i, j in pairs) / len(pairs)


# -- quality metric ----------------------------------------------------------

def raw_metric(result: MiningResult) -> tuple[str, float] | None:
    """(kind, value) of the method's natural quality metric, if any."""
    p = result.payload
    if isinstance(p, TopicSet):
        return ("coherence", p.mean_coherence)
    if isinstance(p, Partition):
        # standard (resolution-1) modularity keeps grid points comparable
        return ("modularity", p.standard_modularity)
    if isinstance(p, PhaseSeries):
        inner = [raw_metric(MiningResult(result.method_id, result.params, ph.payload))
                 for ph in p.phases]
        inner = [m for m in inner if m is not None]
        if not inner:
            return None
        kind = inner[0][0]
        return (kind, sum(v for _, v in inner) / len(inner))
    return None


def modularity_to_unit(q: float) -> float:
    """Map modularity from its [-0.5, 1] range onto [0, 1]."""
    return min(1.0, max(0.0, (q + 0.5) / 1.5))


def normalize_metric(kind_value: tuple[str, float] | None,
                     coherence_bounds: tuple[float, float] | None = None) -> float:
    """Methods without a natural metric score 0.5. Coherence is min-max
    normalized over the current grid; degenerate ranges map to 0.5."""
    if kind_value is None:
        return 0.5
    kind, value = kind_value
    if kind == "modularity":
        return modularity_to_unit(value)
    if coherence_bounds is None:
        return 0.5
    lo, hi = coherence_bounds
    if hi <= lo:
        return 0.5
    return min(1.0, max(0.0, (value - lo) / (hi - lo)))


# -- LLM assessment ----------------------------------------------------------

def summarize_result(result: MiningResult) -> dict:
    """Compact structured summary used in prompts and report composition."""
    p = result.payload
    if isinstance(p, TopicSet):
        return {"kind": "topics", "n_topics": p.n_topics,
                "mean_coherence": round(p.mean_coherence, 4),
                "top_words": [[w for w, _ in p.top_words(t, 5)] for t in range(p.n_topics)]}
    if isinstance(p, Partition):
        sizes = sorted((len(v) for v in p.communities().values()), reverse=True)
        return {"kind": "communities", "n_communities": len(sizes),
                "modularity": round(p.modularity, 4), "sizes": sizes[:10]}
    if isinstance(p, ScoreMap):
        order = sorted(zip(p.node_ids, p.scores), key=lambda kv: (-kv[1], kv[0]))[:5]
        return {"kind": "scores", "n_nodes": len(p.node_ids),
                "top": [[nid, round(s, 6)] for nid, s in order]}
    if isinstance(p, ChangePoints):
        return {"kind": "change_points", "indices": list(p.indices),
                "n_bins": len(p.series.values),
                "segment_means": [round(m, 3) for m in p.segment_means]}
    if isinstance(p, SentimentDist):
        return {"kind": "sentiment", "positive": round(p.positive, 4),
                "negative": round(p.negative, 4), "neutral": round(p.neutral, 4)}
    if isinstance(p, StanceDist):
        return {"kind": "stance",
                "fractions": {k: round(v, 4) for k, v in sorted(p.fractions.items())}}
    if isinstance(p, TimeSeries):
        return {"kind": "series", "n_bins": len(p.values),
                "total": sum(p.values), "peak_bin": int(max(range(len(p.values)),
                                                            key=lambda i: p.values[i]))}
    assert isinstance(p, PhaseSeries)
    return {"kind": "phases", "n_phases": len(p.phases),
            "change_points": list(p.change_points),
            "phases": [summarize_result(MiningResult(result.method_id, {}, ph.payload))
                       for ph in p.phases]}


def llm_assessment(result: MiningResult, llm: Gateway,
                   path_context: str = "") -> tuple[float, bool]:
    """s_llm from the gateway rubric; 0.5 with a flag when the gateway is
    exhausted."""
    summary = summarize_result(result)
    action = LlmAction(
        kind="Invoke", stage="mine",
        prompt=PromptSections(
            system="You assess whether a mining result looks sound for its method.",
            path_context=path_context,
            task=f"Method: {result.method_id}\nSummary: {json.dumps(summary, sort_keys=True)}\n"
                 "Score the result quality in [0, 1].",
            output_schema='{"score": 0.0}',
        ),
        schema_id="rubric_score",
        context={"method_id": result.method_id, "summary": summary,
                 "subset_hash": result.provenance.get("subset_hash", "")},
    )
    try:
        return float(llm.call(action)["score"]), False
    except GatewayError:
        return 0.5, True


# -- evaluation & grid search -------------------------------------------------

def evaluate(result: MiningResult, data: AssembledData, weights: EvalWeights,
             llm: Gateway, u_method: float = 0.5,
             coherence_bounds: tuple[float, float] | None = None,
             path_context: str = "") -> EvalScores:
    s_stab = stability_score(data, result.method_id, result.params)
    s_metric = normalize_metric(raw_metric(result), coherence_bounds)
    s_llm, flagged = llm_assessment(result, llm, path_context)
    flags = ("llm_fallback",) if flagged else ()
    if not result.converged:
        flags = flags + ("not_converged",)
    return combine_scores(s_stab, s_metric, s_llm, u_method, weights, flags)


@dataclass
class GridEntry:
    params: dict
    result: MiningResult | None = None
    scores: EvalScores | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "params": dict(self.params),
            "scores": self.scores.to_dict() if self.scores else None,
            "error": self.error,
        }


def grid_search(data: AssembledData, method_id: str, grid: Sequence[Mapping],
                weights: EvalWeights, llm: Gateway, u_method: float = 0.5,
                path_context: str = "") -> list[GridEntry]:
    """One scored entry per grid point, in grid order; per-point failures are
    recorded in place. Coherence normalization is min-max over this grid."""
    if not grid:
        raise MiningError("empty parameter grid")
    entries = [GridEntry(params=dict(p)) for p in grid]
    for entry in entries:
        try:
            entry.result = run_miner(data, method_id, entry.params)
        except MiningError as exc:
            entry.error = str(exc)

    coherences = []
    for entry in entries:
        if entry.result is not None:
            m = raw_metric(entry.result)
            if m and m[0] == "coherence":
                coherences.append(m[1])
    bounds = (min(coherences), max(coherences)) if coherences else None

    for entry in entries:
        if entry.result is None:
            continue
        try:
            entry.scores = evaluate(entry.result, data, weights, llm,
                                    u_method=u_method, coherence_bounds=bounds,
                                    path_context=path_context)
        except MiningError as exc:
            entry.error = str(exc)
    return entries


def select_best(entries: Sequence[GridEntry]) -> int:
    """argmax e_m, then lowest u_m, then lexicographic params. -1 if nothing
    scored."""
    def key(i: int):
        e = entries[i]
        assert e.scores is not None
        return (-e.scores.e_m, e.scores.u_m, json.dumps(e.params, sort_keys=True, default=str))

    candidates = [i for i, e in enumerate(entries) if e.scores is not None]
    if not candidates:
        return -1
    return min(candidates, key=key)


def expected_uncertainty_bound(weights: EvalWeights) -> float:
    return weights.w_method + weights.w_eval


def check_score_ranges(scores: EvalScores) -> bool:
    vals = (scores.s_stab, scores.s_metric, scores.s_llm, scores.e_m,
            scores.u_method, scores.u_m)
    return all(0.0 <= v <= 1.0 or math.isclose(v, 0.0) or math.isclose(v, 1.0)
               for v in vals)
