import json
import random

import pytest

from agentsight.errors import ConfigError, ReportError
from agentsight.gateway import Gateway, ScriptedMock
from agentsight.reporting import (InsightItem, Report, ReportWeights,
                                  combine_report_scores, compose_report,
                                  evaluate_report)
from agentsight.viz.evaluate import VizEval
from agentsight.viz.linkgraph import DataItem
from agentsight.viz.specs import VizSpec


def _spec(viz_id: str, viz_type: str = "LineChart") -> VizSpec:
    items = (DataItem(item_id=f"item:time_point:0", kind="time_point",
                      fields={"start": 0.0, "value": 5.0}),)
    return VizSpec(viz_id=viz_id, viz_type=viz_type, data_items=items,
                   encodings={"x": "start", "y": "value"}, title="t")


def _eval(e_v: float) -> VizEval:
    return VizEval(s_quality=e_v, s_alignment=e_v, u_path=0.0, e_v=e_v)


def test_insight_item_needs_view_ref():
    with pytest.raises(ReportError):
        InsightItem(insight_id="i", five_w={}, narrative="n", view_refs=(),
                    source_node="n1")


def test_s_comp_counts_filled_slots():
    item = InsightItem(insight_id="i", narrative="n", view_refs=("v1",),
                       source_node="n1",
                       five_w={"who": "users", "what": "x", "when": "w", "where": None,
                               "why": None})
    assert item.s_comp == pytest.approx(0.6)
    full = InsightItem(insight_id="i", narrative="n", view_refs=("v1",),
                       source_node="n1",
                       five_w={w: "x" for w in ("who", "what", "when", "where", "why")})
    assert full.s_comp == 1.0


def test_compose_report_scripted():
    views = [(_spec("v1"), _eval(0.9)), (_spec("v2", "WordCloud"), _eval(0.8))]
    mock = ScriptedMock({"entries": [{
        "stage": "report", "schema_id": "report_items",
        "response": {"items": [
            {"who": "influential users", "what": "topic shift", "when": "H1 2020",
             "where": None, "why": "event-driven", "narrative": "Discussion shifted.",
             "view_refs": ["v1", "v2"]}]},
    }]})
    report = compose_report(views, "goal text", Gateway(mock),
                            selection_threshold=0.3,
                            source_nodes={"v1": "n0005", "v2": "n0007"})
    assert len(report.items) == 1
    assert report.items[0].source_node == "n0005"
    assert report.items[0].s_comp == pytest.approx(0.8)


def test_compose_report_rejects_unknown_view_then_retries():
    views = [(_spec("v1"), _eval(0.9))]
    mock = ScriptedMock({"entries": [
        {"stage": "report", "schema_id": "report_items", "max_uses": 1,
         "response": {"items": [{"narrative": "bad", "view_refs": ["nope"]}]}},
        {"stage": "report", "schema_id": "report_items",
         "response": {"items": [{"narrative": "ok", "view_refs": ["v1"]}]}},
    ]})
    gw = Gateway(mock, max_retries=2)
    report = compose_report(views, "g", gw, selection_threshold=0.0)
    assert report.items[0].narrative == "ok"
    assert [r.outcome for r in gw.records] == ["SchemaError", "Ok"]


def test_compose_report_zero_qualifying_views():
    views = [(_spec("v1"), _eval(0.1))]
    report = compose_report(views, "g", Gateway(ScriptedMock({})),
                            selection_threshold=0.5)
    assert report.items == []
    assert report.advisory


def test_evaluate_report_mechanical_completeness():
    items = [InsightItem(insight_id="i1", narrative="n", view_refs=("v1",),
                         source_node="n1",
                         five_w={"who": "a", "what": "b", "when": "c",
                                 "where": "d", "why": "e"})]
    mock = ScriptedMock({"entries": [
        {"schema_id": "rubric_score", "response": {"score": 1.0}}]})
    evals = evaluate_report(items, "g", Gateway(mock),
                            ReportWeights(w_rel=0.6, w_comp=0.4))
    assert evals[0].s_comp == 1.0
    assert evals[0].e_r == pytest.approx(1.0)


def test_report_weights_simplex():
    with pytest.raises(ConfigError):
        ReportWeights(w_rel=0.7, w_comp=0.7)


def test_e_r_formula_and_monotonicity():
    rng = random.Random(5)
    for _ in range(500):
        a = rng.random()
        w = ReportWeights(w_rel=a, w_comp=1.0 - a)
        s_rel, s_comp = rng.random(), rng.random()
        ev = combine_report_scores(s_rel, s_comp, w)
        assert abs(ev.e_r - (a * s_rel + (1 - a) * s_comp)) <= 1e-12
        up = combine_report_scores(min(1.0, s_rel + 0.05), s_comp, w)
        if a > 0:
            assert up.e_r >= ev.e_r


def test_report_serialization_round_trip():
    item = InsightItem(insight_id="i1", narrative="n", view_refs=("v1", "v2"),
                       source_node="n9",
                       five_w={"who": "a", "what": None, "when": "c", "where": None,
                               "why": "e"})
    report = Report(items=[item], evals=[combine_report_scores(0.5, 0.4,
                                                               ReportWeights())])
    doc = json.loads(json.dumps(report.to_dict()))
    restored = InsightItem.from_dict(doc["items"][0])
    assert restored == item
