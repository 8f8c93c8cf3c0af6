"""Insight report composition and scoring.

Selected views are summarized into structured data (not pixels) and handed
to the LLM, which fills the 5W schema per insight. Completeness is computed
mechanically (filled slots / 5); relevance comes from the rubric:

    e_r = w_rel * s_rel + w_comp * s_comp
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import ConfigError, GatewayError, ReportError
from .gateway import Gateway, LlmAction, PromptSections
from .viz.evaluate import VizEval
from .viz.specs import VizSpec

FIVE_W = ("who", "what", "when", "where", "why")


@dataclass(frozen=True)
class ReportWeights:
    w_rel: float = 0.6
    w_comp: float = 0.4

    def __post_init__(self):
        if min(self.w_rel, self.w_comp) < 0:
            raise ConfigError("report weights must be non-negative")
        if abs(self.w_rel + self.w_comp - 1.0) > 1e-9:
            raise ConfigError("report weights must sum to 1")


@dataclass(frozen=True)
class InsightItem:
    insight_id: str
    five_w: Mapping[str, str | None]
    narrative: str
    view_refs: tuple[str, ...]
    source_node: str

    def __post_init__(self):
        if not self.view_refs:
            raise ReportError(f"{self.insight_id}: needs at least one view reference")

    @property
    def s_comp(self) -> float:
        filled = sum(1 for w in FIVE_W if self.five_w.get(w))
        return filled / len(FIVE_W)

    def to_dict(self) -> dict:
        return {
            "insight_id": self.insight_id,
            "five_w": {w: self.five_w.get(w) for w in FIVE_W},
            "narrative": self.narrative,
            "view_refs": list(self.view_refs),
            "source_node": self.source_node,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "InsightItem":
        return cls(insight_id=d["insight_id"], five_w=dict(d["five_w"]),
                   narrative=d["narrative"], view_refs=tuple(d["view_refs"]),
                   source_node=d["source_node"])


@dataclass(frozen=True)
class ReportEval:
    s_rel: float
    s_comp: float
    e_r: float
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"s_rel": self.s_rel, "s_comp": self.s_comp, "e_r": self.e_r,
                "flags": list(self.flags)}


def combine_report_scores(s_rel: float, s_comp: float, weights: ReportWeights,
                          flags: tuple[str, ...] = ()) -> ReportEval:
    e_r = weights.w_rel * s_rel + weights.w_comp * s_comp
    return ReportEval(s_rel=s_rel, s_comp=s_comp, e_r=e_r, flags=flags)


@dataclass
class Report:
    items: list[InsightItem] = field(default_factory=list)
    evals: list[ReportEval] = field(default_factory=list)
    advisory: str | None = None

    def to_dict(self) -> dict:
        return {
            "items": [i.to_dict() for i in self.items],
            "evals": [e.to_dict() for e in self.evals],
            "advisory": self.advisory,
        }


def _view_summary(spec: VizSpec, ev: VizEval) -> dict:
    sample = []
    for item in spec.data_items[:8]:
        sample.append({k: v for k, v in sorted(item.fields.items())
                       if isinstance(v, (str, int, float, bool))})
    return {
        "viz_id": spec.viz_id,
        "viz_type": spec.viz_type,
        "title": spec.title,
        "encodings": dict(spec.encodings),
        "e_v": round(ev.e_v, 4),
        "sample_items": sample,
        "n_items": len(spec.data_items),
    }


def compose_report(views: Sequence[tuple[VizSpec, VizEval]], goal: str, llm: Gateway,
                   *, selection_threshold: float = 0.0,
                   source_nodes: Mapping[str, str] | None = None,
                   path_context: str = "") -> Report:
    """Consolidate qualifying views (e_v >= threshold) into 5W insights.
    With zero qualifying views the report is empty and carries an advisory
    instead of failing."""
    qualifying = [(s, e) for s, e in views if e.e_v >= selection_threshold]
    if not qualifying:
        return Report(advisory="no view reached the effectiveness threshold; "
                               "refine the goal or relax thresholds")
    summaries = [_view_summary(s, e) for s, e in qualifying]
    viz_ids = [s.viz_id for s, _ in qualifying]
    action = LlmAction(
        kind="Invoke", stage="report",
        prompt=PromptSections(
            system="You consolidate analysis views into 5W-structured insights.",
            path_context=path_context,
            task=(f"Goal: {goal}\nViews (structured summaries, not images):\n"
                  f"{json.dumps(summaries, sort_keys=True)}\n"
                  "Produce insight items; leave unknown 5W slots null."),
            output_schema=json.dumps({"items": [{
                "who": None, "what": None, "when": None, "where": None,
                "why": None, "narrative": "...", "view_refs": ["viz-id"]}]}),
        ),
        schema_id="report_items",
        context={"goal": goal, "viz_ids": viz_ids},
    )
    response = llm.call(action)
    nodes = source_nodes or {}
    items = []
    for i, raw in enumerate(response["items"]):
        refs = tuple(raw["view_refs"])
        items.append(InsightItem(
            insight_id=f"insight-{i + 1}",
            five_w={w: raw.get(w) for w in FIVE_W},
            narrative=raw["narrative"],
            view_refs=refs,
            source_node=nodes.get(refs[0], ""),
        ))
    return Report(items=items)


def evaluate_report(items: Sequence[InsightItem], goal: str, llm: Gateway,
                    weights: ReportWeights = ReportWeights(),
                    path_context: str = "") -> list[ReportEval]:
    """Score every item: completeness mechanically, relevance via rubric
    (0.5 flagged on gateway exhaustion). Items are ranked, never suppressed."""
    out = []
    for item in items:
        action = LlmAction(
            kind="Invoke", stage="report",
            prompt=PromptSections(
                system="You grade how relevant an insight is to the stated goal.",
                path_context=path_context,
                task=(f"Goal: {goal}\nInsight: {json.dumps(item.to_dict(), sort_keys=True)}\n"
                      "Return a relevance score in [0, 1]."),
                output_schema='{"score": 0.0}',
            ),
            schema_id="rubric_score",
            context={"goal": goal, "insight_id": item.insight_id,
                     "narrative": item.narrative},
        )
        flags: tuple[str, ...] = ()
        try:
            s_rel = float(llm.call(action)["score"])
        except GatewayError:
            s_rel, flags = 0.5, ("llm_fallback",)
        out.append(combine_report_scores(s_rel, item.s_comp, weights, flags))
    return out
