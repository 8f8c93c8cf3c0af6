"""Atomization and the heterogeneous link graph.

Query and mining results are atomized into data items; the link graph
G = (V, E) connects visual elements, data items, and snapshot entities so
views can trace across each other. Traversal follows documented edge-kind
paths per (source kind, target kind) pair, never free-form reachability.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..datastore import DatasetSnapshot, Subset
from ..errors import VisualizationError
from ..mining.types import (ChangePoints, MiningResult, Partition, PhaseSeries,
                            ScoreMap, TimeSeries, TopicSet)
from ..mining.timeseries import bin_timestamps
from ..textnorm import content_tokens

Scalar = str | int | float | bool


@dataclass(frozen=True)
class DataItem:
    item_id: str
    kind: str  # word | topic | time_point | community | user_node | post_ref | metric_bar
    fields: Mapping[str, Scalar]
    entity_refs: tuple[str, ...] = ()


@dataclass(frozen=True)
class LinkNode:
    node_id: str
    kind: str  # word | time_point | community | user_node | post | user | element | ...
    label: str = ""


class LinkGraph:
    """Directed typed edges with reverse adjacency maintained."""

    EDGE_KINDS = ("contains", "maps_to", "corresponds")

    def __init__(self) -> None:
        self.nodes: dict[str, LinkNode] = {}
        self._fwd: dict[tuple[str, str], list[str]] = {}
        self._rev: dict[tuple[str, str], list[str]] = {}
        self.edge_count = 0

    def add_node(self, node: LinkNode) -> None:
        self.nodes.setdefault(node.node_id, node)

    def add_edge(self, src: str, kind: str, dst: str) -> None:
        if kind not in self.EDGE_KINDS:
            raise VisualizationError(f"unknown edge kind {kind!r}")
        if src not in self.nodes or dst not in self.nodes:
            raise VisualizationError(f"edge endpoints must exist: {src} -> {dst}")
        fwd = self._fwd.setdefault((src, kind), [])
        if dst not in fwd:
            fwd.append(dst)
            self._rev.setdefault((dst, kind), []).append(src)
            self.edge_count += 1

    def out_neighbors(self, node_id: str, kind: str) -> list[str]:
        return sorted(self._fwd.get((node_id, kind), ()))

    def in_neighbors(self, node_id: str, kind: str) -> list[str]:
        return sorted(self._rev.get((node_id, kind), ()))

    def step(self, node_ids: Iterable[str], kind: str, forward: bool) -> list[str]:
        out: set[str] = set()
        for nid in node_ids:
            out.update(self.out_neighbors(nid, kind) if forward
                       else self.in_neighbors(nid, kind))
        return sorted(out)

    def kind_of(self, node_id: str) -> str:
        try:
            return self.nodes[node_id].kind
        except KeyError:
            raise VisualizationError(f"unknown link-graph node {node_id!r}") from None


def word_node(token: str) -> str:
    return f"item:word:{token}"


def time_point_node(index: int) -> str:
    return f"item:time_point:{index}"


def post_node(post_id: str) -> str:
    return f"entity:post:{post_id}"


def user_node(user_id: str) -> str:
    return f"entity:user:{user_id}"


def community_node(scope: str, label: int) -> str:
    return f"item:community:{scope}:{label}"


# documented traversal templates: (edge kind, forward?) sequences
_PATHS: dict[tuple[str, str], tuple[tuple[str, bool], ...]] = {
    ("word", "post"): (("contains", True),),
    ("post", "word"): (("contains", False),),
    ("word", "time_point"): (("contains", True), ("maps_to", True)),
    ("time_point", "word"): (("maps_to", False), ("contains", False)),
    ("post", "time_point"): (("maps_to", True),),
    ("time_point", "post"): (("maps_to", False),),
    ("community", "user"): (("contains", True),),
    ("user", "community"): (("contains", False),),
    ("user", "post"): (("contains", True),),
    ("post", "user"): (("contains", False),),
}


def trace(graph: LinkGraph, node_id: str, target_kind: str) -> list[str]:
    """All target-kind nodes reachable from `node_id` along the documented
    path for this (source kind, target kind) pair, in deterministic order.
    Element sources are unwrapped to their items; target 'element' expands
    the final items through their corresponds edges."""
    src_kind = graph.kind_of(node_id)
    frontier = [node_id]
    if src_kind == "element":
        frontier = graph.step(frontier, "corresponds", forward=False)
        kinds = sorted({graph.kind_of(n) for n in frontier})
        if not kinds:
            return []
        src_kind = kinds[0]
        frontier = [n for n in frontier if graph.kind_of(n) == src_kind]

    want_elements = target_kind == "element"
    item_target = src_kind if want_elements else target_kind

    if not want_elements or item_target != src_kind:
        path = _PATHS.get((src_kind, item_target))
        if path is None and not want_elements:
            raise VisualizationError(
                f"no documented path from {src_kind!r} to {target_kind!r}")
        if path is not None:
            for kind, forward in path:
                frontier = graph.step(frontier, kind, forward)

    if want_elements:
        return graph.step(frontier, "corresponds", forward=True)
    return frontier


def trace_via(graph: LinkGraph, node_id: str, via_kind: str, target_kind: str) -> list[str]:
    """Two-leg trace, e.g. brushed time points -> posts -> words."""
    middle = trace(graph, node_id, via_kind)
    out: set[str] = set()
    for mid in middle:
        out.update(trace(graph, mid, target_kind))
    return sorted(out)


def _first_series(mining_results: Sequence[MiningResult]) -> TimeSeries | None:
    for r in mining_results:
        p = r.payload
        if isinstance(p, TimeSeries):
            return p
        if isinstance(p, ChangePoints):
            return p.series
        if isinstance(p, PhaseSeries):
            return p.series
    return None


def atomize(query_results: Sequence[Subset], mining_results: Sequence[MiningResult],
            snapshot: DatasetSnapshot) -> tuple[list[DataItem], LinkGraph]:
    """Atomize results into data items and build the link graph.

    Words connect to containing posts (contains), posts map to the time
    point of their bin (maps_to), communities contain their member users,
    users contain their posts.
    """
    graph = LinkGraph()
    items: list[DataItem] = []

    post_ids: set[str] = set()
    user_ids: set[str] = set()
    for s in query_results:
        post_ids.update(s.X)
        user_ids.update(s.T)
    for r in mining_results:
        p = r.payload
        if isinstance(p, (Partition, ScoreMap)):
            user_ids.update(p.node_ids)
        if isinstance(p, TopicSet):
            post_ids.update(p.doc_ids)
        if isinstance(p, PhaseSeries):
            for ph in p.phases:
                if isinstance(ph.payload, TopicSet):
                    post_ids.update(ph.payload.doc_ids)
                elif isinstance(ph.payload, Partition):
                    user_ids.update(ph.payload.node_ids)

    for pid in sorted(post_ids):
        graph.add_node(LinkNode(post_node(pid), "post", pid))
    for uid in sorted(user_ids):
        graph.add_node(LinkNode(user_node(uid), "user", uid))

    # author linkage: user contains post
    for pid in sorted(post_ids):
        author = snapshot.posts[pid].author_id
        if author in user_ids:
            graph.add_edge(user_node(author), "contains", post_node(pid))

    # word items over the stop-worded vocabulary of in-scope posts
    vocab: dict[str, set[str]] = {}
    for pid in sorted(post_ids):
        for tok in set(content_tokens(snapshot.posts[pid].text)):
            vocab.setdefault(tok, set()).add(pid)
    for tok in sorted(vocab):
        item = DataItem(item_id=word_node(tok), kind="word",
                        fields={"text": tok, "df": len(vocab[tok])})
        items.append(item)
        graph.add_node(LinkNode(item.item_id, "word", tok))
        for pid in sorted(vocab[tok]):
            graph.add_edge(item.item_id, "contains", post_node(pid))

    # time points from the mining series if present, else weekly bins
    series = _first_series(mining_results)
    if series is None and post_ids:
        series = bin_timestamps([snapshot.posts[p].created_at for p in sorted(post_ids)],
                                "week")
    if series is not None:
        edges = series.bin_edges
        for i, value in enumerate(series.values):
            item = DataItem(item_id=time_point_node(i), kind="time_point",
                            fields={"index": i, "start": edges[i], "end": edges[i + 1],
                                    "value": value})
            items.append(item)
            graph.add_node(LinkNode(item.item_id, "time_point", f"bin {i}"))
        for pid in sorted(post_ids):
            ts = snapshot.posts[pid].created_at
            if edges[0] <= ts < edges[-1]:
                idx = min(int((ts - edges[0]) // (edges[1] - edges[0])), len(series.values) - 1)
                graph.add_edge(post_node(pid), "maps_to", time_point_node(idx))

    # communities and topics from mining results
    for ri, r in enumerate(mining_results):
        payloads: list[tuple[str, object]] = []
        if isinstance(r.payload, Partition):
            payloads.append((f"r{ri}", r.payload))
        elif isinstance(r.payload, PhaseSeries):
            for pi, ph in enumerate(r.payload.phases):
                if isinstance(ph.payload, Partition):
                    payloads.append((f"r{ri}p{pi}", ph.payload))
        for scope, part in payloads:
            for label, members in part.communities().items():
                item = DataItem(item_id=community_node(scope, label), kind="community",
                                fields={"label": label, "size": len(members)},
                                entity_refs=tuple(members))
                items.append(item)
                graph.add_node(LinkNode(item.item_id, "community", f"community {label}"))
                for uid in members:
                    if uid in user_ids:
                        graph.add_edge(item.item_id, "contains", user_node(uid))

    return items, graph


def bind_elements(graph: LinkGraph, viz_id: str,
                  element_items: Mapping[str, str]) -> None:
    """Register one visual element per (element key -> item/entity node) and
    connect it with a corresponds edge from the item."""
    for key, target in element_items.items():
        el_id = f"element:{viz_id}:{key}"
        graph.add_node(LinkNode(el_id, "element", key))
        if target in graph.nodes:
            graph.add_edge(target, "corresponds", el_id)
