"""Declarative chart specs and the integrate-vs-coordinate decision.

Specs are pure data (type, items, channel encodings, params, title) plus
server-computed layout coordinates for force graphs, so clients only draw.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from ..datastore import DatasetSnapshot, format_utc
from ..errors import VisualizationError
from ..mining.types import (ChangePoints, MiningResult, Partition, PhaseSeries,
                            ScoreMap, SentimentDist, StanceDist, TimeSeries, TopicSet)
from .linkgraph import DataItem, time_point_node, user_node, word_node

VIZ_TYPES = ("WordCloud", "LineChart", "BarChart", "ForceGraph", "ParallelCoordinates")

WORD_CLOUD_TOP_K = 50


@dataclass(frozen=True)
class VizSpec:
    viz_id: str
    viz_type: str
    data_items: tuple[DataItem, ...]
    encodings: Mapping[str, str]  # channel -> field
    params: Mapping[str, object] = field(default_factory=dict)
    title: str = ""
    provenance: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.viz_type not in VIZ_TYPES:
            raise VisualizationError(f"unknown viz type {self.viz_type!r}")
        for channel, fname in self.encodings.items():
            for item in self.data_items:
                if fname not in item.fields:
                    raise VisualizationError(
                        f"{self.viz_id}: encoded field {fname!r} (channel {channel}) "
                        f"missing on item {item.item_id}")

    def to_dict(self) -> dict:
        return {
            "viz_id": self.viz_id,
            "viz_type": self.viz_type,
            "title": self.title,
            "encodings": dict(self.encodings),
            "params": dict(self.params),
            "provenance": dict(self.provenance),
            "data_items": [
                {"item_id": i.item_id, "kind": i.kind, "fields": dict(i.fields),
                 "entity_refs": list(i.entity_refs)}
                for i in self.data_items
            ],
        }

    def element_map(self) -> dict[str, str]:
        """element key -> link-graph node id for bind_elements."""
        return {i.item_id.replace(":", "_"): i.item_id for i in self.data_items}


def force_layout(n_nodes: int, edges: Sequence[tuple[int, int, float]], seed: int,
                 iterations: int = 60) -> list[tuple[float, float]]:
    """Seeded Fruchterman-Reingold in the unit square; deterministic."""
    rng = random.Random(seed)
    pos = [(rng.random(), rng.random()) for _ in range(n_nodes)]
    if n_nodes <= 1:
        return [(0.5, 0.5)] * n_nodes
    k = math.sqrt(1.0 / n_nodes)
    adj = [(s, d, w) for s, d, w in edges if s != d]
    t = 0.1
    dt = t / (iterations + 1)
    for _ in range(iterations):
        disp = [[0.0, 0.0] for _ in range(n_nodes)]
        for i in range(n_nodes):
            xi, yi = pos[i]
            for j in range(i + 1, n_nodes):
                dx = xi - pos[j][0]
                dy = yi - pos[j][1]
                dist2 = dx * dx + dy * dy + 1e-9
                f = k * k / dist2
                disp[i][0] += dx * f
                disp[i][1] += dy * f
                disp[j][0] -= dx * f
                disp[j][1] -= dy * f
        for s, d, w in adj:
            dx = pos[s][0] - pos[d][0]
            dy = pos[s][1] - pos[d][1]
            dist = math.sqrt(dx * dx + dy * dy) + 1e-9
            f = dist * dist / k * w
            fx, fy = dx / dist * f, dy / dist * f
            disp[s][0] -= fx
            disp[s][1] -= fy
            disp[d][0] += fx
            disp[d][1] += fy
        for i in range(n_nodes):
            dx, dy = disp[i]
            dlen = math.sqrt(dx * dx + dy * dy) + 1e-9
            step = min(dlen, t)
            x = pos[i][0] + dx / dlen * step
            y = pos[i][1] + dy / dlen * step
            pos[i] = (min(1.0, max(0.0, x)), min(1.0, max(0.0, y)))
        t -= dt
    return pos


def _word_cloud(topic_set: TopicSet, viz_id: str, title: str, provenance: Mapping) -> VizSpec:
    k = topic_set.n_topics
    n_words = len(topic_set.vocab)
    shares = [0.0] * k
    for row in topic_set.doc_topic:
        for t, v in enumerate(row):
            shares[t] += v
    total_share = sum(shares) or 1.0
    shares = [s / total_share for s in shares]
    weight = [0.0] * n_words
    owner = [0] * n_words
    for w in range(n_words):
        best_t, best_v = 0, -1.0
        acc = 0.0
        for t in range(k):
            v = topic_set.topic_word[t][w]
            acc += shares[t] * v
            if v > best_v:
                best_t, best_v = t, v
        weight[w] = acc
        owner[w] = best_t
    order = sorted(range(n_words), key=lambda w: (-weight[w], topic_set.vocab[w]))
    items = tuple(
        DataItem(item_id=word_node(topic_set.vocab[w]), kind="word",
                 fields={"text": topic_set.vocab[w], "weight": weight[w],
                         "topic": owner[w]})
        for w in order[:WORD_CLOUD_TOP_K]
    )
    return VizSpec(viz_id=viz_id, viz_type="WordCloud", data_items=items,
                   encodings={"size": "weight", "group": "topic", "label": "text"},
                   params={"top_k": WORD_CLOUD_TOP_K}, title=title, provenance=provenance)


def _line_chart(series: TimeSeries, viz_id: str, title: str, provenance: Mapping,
                change_points: tuple[int, ...] = ()) -> VizSpec:
    items = tuple(
        DataItem(item_id=time_point_node(i), kind="time_point",
                 fields={"index": i, "start": series.bin_edges[i],
                         "end": series.bin_edges[i + 1], "value": v,
                         "start_label": format_utc(series.bin_edges[i])})
        for i, v in enumerate(series.values)
    )
    return VizSpec(viz_id=viz_id, viz_type="LineChart", data_items=items,
                   encodings={"x": "start", "y": "value", "label": "start_label"},
                   params={"change_points": list(change_points),
                           "bin_seconds": series.bin_edges[1] - series.bin_edges[0]
                           if len(series.bin_edges) > 1 else 0},
                   title=title, provenance=provenance)


def _force_graph(partition: Partition, viz_id: str, title: str, provenance: Mapping,
                 snapshot: DatasetSnapshot | None, layout_seed: int,
                 graph_edges: Sequence[tuple[int, int, float]] | None = None,
                 scope: str = "r0") -> VizSpec:
    n = len(partition.node_ids)
    edges = list(graph_edges or ())
    coords = force_layout(n, edges, seed=layout_seed)
    items = []
    for i, uid in enumerate(partition.node_ids):
        fields = {"name": uid, "community": partition.labels[i],
                  "x": round(coords[i][0], 6), "y": round(coords[i][1], 6)}
        if snapshot is not None and uid in snapshot.users:
            fields["follower_count"] = snapshot.users[uid].follower_count
        items.append(DataItem(item_id=user_node(uid), kind="user_node",
                              fields=fields, entity_refs=(uid,)))
    encodings = {"color": "community", "x": "x", "y": "y", "label": "name"}
    return VizSpec(viz_id=viz_id, viz_type="ForceGraph", data_items=tuple(items),
                   encodings=encodings,
                   params={"layout_seed": layout_seed, "n_communities":
                           len(set(partition.labels)),
                           "edges": [[s, d, w] for s, d, w in edges],
                           "community_scope": scope,
                           "modularity": partition.modularity},
                   title=title, provenance=provenance)


def _attribute_bar(partition: Partition, attribute: str, viz_id: str,
                   snapshot: DatasetSnapshot, provenance: Mapping,
                   top_k: int = 20) -> VizSpec | None:
    values = []
    for uid in partition.node_ids:
        if uid in snapshot.users:
            values.append((uid, getattr(snapshot.users[uid], attribute)))
    if not values:
        return None
    values.sort(key=lambda kv: (-kv[1], kv[0]))
    items = tuple(
        DataItem(item_id=f"item:metric_bar:{viz_id}:{uid}", kind="metric_bar",
                 fields={"name": uid, attribute: v}, entity_refs=(uid,))
        for uid, v in values[:top_k]
    )
    return VizSpec(viz_id=viz_id, viz_type="BarChart", data_items=items,
                   encodings={"height": attribute, "label": "name"},
                   params={"attribute": attribute, "entity_kind": "user", "top_k": top_k},
                   title=f"Top users by {attribute.replace('_', ' ')}",
                   provenance=provenance)


def _score_bar(scores: ScoreMap, viz_id: str, title: str, provenance: Mapping,
               top_k: int = 20) -> VizSpec:
    ranked = sorted(zip(scores.node_ids, scores.scores), key=lambda kv: (-kv[1], kv[0]))
    items = tuple(
        DataItem(item_id=f"item:metric_bar:{viz_id}:{nid}", kind="metric_bar",
                 fields={"name": nid, "score": s}, entity_refs=(nid,))
        for nid, s in ranked[:top_k]
    )
    return VizSpec(viz_id=viz_id, viz_type="BarChart", data_items=items,
                   encodings={"height": "score", "label": "name"},
                   params={"top_k": top_k}, title=title, provenance=provenance)


def _fraction_bar(fractions: Mapping[str, float], viz_id: str, title: str,
                  provenance: Mapping) -> VizSpec:
    items = tuple(
        DataItem(item_id=f"item:metric_bar:{viz_id}:{label}", kind="metric_bar",
                 fields={"name": label, "fraction": frac})
        for label, frac in sorted(fractions.items())
    )
    return VizSpec(viz_id=viz_id, viz_type="BarChart", data_items=items,
                   encodings={"height": "fraction", "label": "name"},
                   params={}, title=title, provenance=provenance)


def generate_specs(result: MiningResult, hints: Sequence[str],
                   snapshot: DatasetSnapshot | None = None, *,
                   viz_id_prefix: str = "viz", layout_seed: int = 7,
                   provenance: Mapping | None = None) -> list[VizSpec]:
    """Candidate specs for a mining result.

    Simple payloads yield 1..3 candidates; phase composites yield one
    coordinated group (per-phase charts plus the volume line chart). At
    least one candidate type must be hinted, else no-compatible-type."""
    prov = dict(provenance or {})
    p = result.payload
    specs: list[VizSpec] = []
    seq = 0

    def vid() -> str:
        nonlocal seq
        seq += 1
        return f"{viz_id_prefix}-{seq}"

    if isinstance(p, TopicSet):
        specs.append(_word_cloud(p, vid(), "Topic terms", prov))
    elif isinstance(p, PhaseSeries):
        for ph in p.phases:
            if isinstance(ph.payload, TopicSet):
                specs.append(_word_cloud(ph.payload, vid(),
                                         f"Topic terms ({ph.label})", prov))
            elif isinstance(ph.payload, Partition):
                specs.append(_force_graph(ph.payload, vid(),
                                          f"Communities ({ph.label})", prov,
                                          snapshot, layout_seed, scope=ph.label))
        specs.append(_line_chart(p.series, vid(), "Volume over time", prov,
                                 change_points=p.change_points))
    elif isinstance(p, Partition):
        edges = result.provenance.get("graph_edges")
        specs.append(_force_graph(p, vid(), "Community structure", prov, snapshot,
                                  layout_seed, graph_edges=edges))
        if snapshot is not None:
            bar = _attribute_bar(p, "follower_count", vid(), snapshot, prov)
            if bar is not None:
                specs.append(bar)
    elif isinstance(p, ScoreMap):
        specs.append(_score_bar(p, vid(), f"Top nodes by {result.method_id}", prov))
    elif isinstance(p, ChangePoints):
        specs.append(_line_chart(p.series, vid(), "Volume over time", prov,
                                 change_points=p.indices))
    elif isinstance(p, TimeSeries):
        specs.append(_line_chart(p, vid(), "Volume over time", prov))
    elif isinstance(p, SentimentDist):
        specs.append(_fraction_bar({"positive": p.positive, "negative": p.negative,
                                    "neutral": p.neutral}, vid(),
                                   "Sentiment distribution", prov))
    elif isinstance(p, StanceDist):
        specs.append(_fraction_bar(p.fractions, vid(), "Stance distribution", prov))
    else:
        raise VisualizationError(f"no visualization for payload {type(p).__name__}")

    if hints and not any(s.viz_type in hints for s in specs):
        raise VisualizationError(
            f"no compatible visualization type: payload offers "
            f"{sorted({s.viz_type for s in specs})}, hints are {sorted(hints)}")
    return specs


@dataclass
class LayoutPlan:
    views: list[str]
    integrated: list[dict] = field(default_factory=list)
    links: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"views": list(self.views), "integrated": list(self.integrated),
                "links": list(self.links)}


def integrate_or_coordinate(specs: Sequence[VizSpec], link_graph=None) -> tuple[LayoutPlan, list[VizSpec]]:
    """Fold attribute-encodable pairs into one view; coordinate the rest.

    Current integration rule: a BarChart carrying a user attribute whose
    entities all appear in a ForceGraph folds into the graph's size channel
    and is dropped. Anything related but not integrable is coordinated via
    shared link-graph keys; single views get a plan with no links.
    """
    kept: list[VizSpec] = list(specs)
    plan = LayoutPlan(views=[])
    integrated: list[dict] = []

    force_idx = {i: s for i, s in enumerate(kept) if s.viz_type == "ForceGraph"}
    for i, bar in list(enumerate(kept)):
        if bar.viz_type != "BarChart" or bar.params.get("entity_kind") != "user":
            continue
        attribute = bar.params.get("attribute")
        if not attribute:
            continue
        bar_entities = {e for item in bar.data_items for e in item.entity_refs}
        for j, fg in force_idx.items():
            fg_entities = {e for item in fg.data_items for e in item.entity_refs}
            if not bar_entities or not bar_entities <= fg_entities:
                continue
            if any(attribute not in item.fields for item in fg.data_items):
                continue
            new_enc = dict(fg.encodings)
            new_enc["size"] = attribute
            new_enc.setdefault("label", "name")
            kept[j] = replace(fg, encodings=new_enc)
            force_idx[j] = kept[j]
            integrated.append({"into": fg.viz_id, "dropped": bar.viz_id,
                               "channel": "size", "field": attribute,
                               "label_channel": "label"})
            kept[i] = None  # type: ignore[call-overload]
            break
    kept = [s for s in kept if s is not None]
    plan.views = [s.viz_id for s in kept]
    plan.integrated = integrated

    # coordination: views sharing a data-item kind get linked on that kind
    if len(kept) > 1:
        by_kind: dict[str, list[str]] = {}
        for s in kept:
            for kind in sorted({i.kind for i in s.data_items}):
                by_kind.setdefault(kind, []).append(s.viz_id)
        for kind in sorted(by_kind):
            ids = sorted(set(by_kind[kind]))
            if len(ids) > 1:
                plan.links.append({"via": kind, "views": ids})
        # word clouds and line charts link through posts: word -> post -> time bin
        clouds = sorted(s.viz_id for s in kept if s.viz_type == "WordCloud")
        lines = sorted(s.viz_id for s in kept if s.viz_type == "LineChart")
        if clouds and lines:
            plan.links.append({"via": "word-time", "views": clouds + lines})
    return plan, kept
