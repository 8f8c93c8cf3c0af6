"""Independent oracles: unindexed full-scan query execution, a from-scratch
modularity calculator, and a link-closure scanner. These deliberately avoid
the engine's indexes and incremental bookkeeping."""

from __future__ import annotations

import re

from agentsight.datastore import DatasetSnapshot, EdgeKind, Modality, Subset
from agentsight.query.model import FILTER_ATTRS, Op, QueryChain, QueryStep, SourceNode

_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


def _tokens(text: str) -> set[str]:
    return {t.lower() for t in _TOKEN.findall(text)}


_CMP = {
    ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b, "!=": lambda a, b: a != b,
}


def _end_is_user(kind: EdgeKind, end: str) -> bool:
    if end == "src":
        return kind in (EdgeKind.FOLLOWS, EdgeKind.POSTS, EdgeKind.RETWEETS)
    return kind in (EdgeKind.FOLLOWS, EdgeKind.MENTIONS)


def oracle_step(step: QueryStep, snap: DatasetSnapshot, subset: Subset) -> Subset:
    p = step.params
    op = step.operation
    t, x, n = set(subset.T), set(subset.X), set(subset.N)

    if op is Op.EXPAND_MODALITY:
        target = p["target"]
        if p["scope"] == "universe":
            pool = {"T": snap.users, "X": snap.posts, "N": snap.edges}[target.value]
            if target is Modality.T:
                t |= set(pool)
            elif target is Modality.X:
                x |= set(pool)
            else:
                n |= set(pool)
        else:
            if target is Modality.T:
                for pid in subset.X:
                    t.add(snap.posts[pid].author_id)
                for eid in subset.N:
                    e = snap.edges[eid]
                    if _end_is_user(e.kind, "src"):
                        t.add(e.src_id)
                    if _end_is_user(e.kind, "dst"):
                        t.add(e.dst_id)
            elif target is Modality.X:
                for post in snap.posts.values():
                    if post.author_id in subset.T:
                        x.add(post.post_id)
                for eid in subset.N:
                    e = snap.edges[eid]
                    if not _end_is_user(e.kind, "src"):
                        x.add(e.src_id)
                    if not _end_is_user(e.kind, "dst"):
                        x.add(e.dst_id)
            else:
                pool = subset.T | subset.X
                for eid, e in snap.edges.items():
                    if e.src_id in pool and e.dst_id in pool:
                        n.add(eid)
    elif op is Op.FILTER_ATTR:
        attr, cmp_, value = p["attr"], p["cmp"], p["value"]
        modality = FILTER_ATTRS[attr][0]
        if modality is Modality.T:
            t = {u for u in t if _CMP[cmp_](getattr(snap.users[u], attr), value)}
        else:
            x = {q for q in x if _CMP[cmp_](getattr(snap.posts[q], attr), value)}
    elif op is Op.TEXT_SEARCH:
        def hit(text: str) -> bool:
            toks = _tokens(text)
            for term in p["terms"]:
                needed = _tokens(term)
                if needed and needed <= toks:
                    return True
            return False
        x = {q for q in x if hit(snap.posts[q].text)}
    elif op is Op.TIME_WINDOW:
        x = {q for q in x if p["start"] <= snap.posts[q].created_at < p["end"]}
    elif op is Op.TRAVERSE_EDGE:
        kind, direction = p["kind"], p["direction"]
        for eid, e in snap.edges.items():
            if e.kind is not kind:
                continue
            src_user = _end_is_user(kind, "src")
            dst_user = _end_is_user(kind, "dst")
            src_in = e.src_id in (subset.T if src_user else subset.X)
            dst_in = e.dst_id in (subset.T if dst_user else subset.X)
            if direction in ("out", "both") and src_in:
                n.add(eid)
                (t if dst_user else x).add(e.dst_id)
            if direction in ("in", "both") and dst_in:
                n.add(eid)
                (t if src_user else x).add(e.src_id)
    else:  # SampleTopK
        key, k, desc = p["order_key"], p["k"], p["descending"]
        if key in ("follower_count", "following_count"):
            ranked = sorted(t, key=lambda u: ((-getattr(snap.users[u], key)) if desc
                                              else getattr(snap.users[u], key), u))
            t = set(ranked[:k])
        else:
            ranked = sorted(x, key=lambda q: ((-getattr(snap.posts[q], key)) if desc
                                              else getattr(snap.posts[q], key), q))
            x = set(ranked[:k])
    return Subset(snapshot_id=subset.snapshot_id, T=frozenset(t), X=frozenset(x),
                  N=frozenset(n))


def oracle_chain(chain: QueryChain, snap: DatasetSnapshot,
                 initial: Subset | None = None) -> Subset:
    if isinstance(chain.source, SourceNode):
        assert initial is not None
        current = initial
    else:
        current = Subset(snapshot_id=snap.snapshot_id)
    for step in chain.steps:
        current = oracle_step(step, snap, current)
    return current


def oracle_modularity(n_nodes: int, und_edges, labels, resolution: float = 1.0) -> float:
    """Direct A_ij double sum over the dense adjacency; O(n^2) but obviously
    correct."""
    a = [[0.0] * n_nodes for _ in range(n_nodes)]
    for i, j, w in und_edges:
        if i == j:
            a[i][i] += 2.0 * w
        else:
            a[i][j] += w
            a[j][i] += w
    two_m = sum(sum(row) for row in a)
    k = [sum(row) for row in a]
    q = 0.0
    for i in range(n_nodes):
        for j in range(n_nodes):
            if labels[i] == labels[j]:
                q += a[i][j] - resolution * k[i] * k[j] / two_m
    return q / two_m
