"""Chain execution over immutable snapshots.

Filter-class steps shrink their modality set; traversal-class steps only add
IDs reached through shared identifiers. Empty inputs propagate as empty
outputs, never as errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..datastore import DatasetSnapshot, EdgeKind, Modality, Subset
from ..errors import QueryExecutionError
from ..textnorm import tokenize
from .model import FILTER_ATTRS, Op, QueryChain, QueryStep, SourceNode

_CMP = {
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _endpoint_modality(kind: EdgeKind, end: str) -> Modality:
    if end == "src":
        return Modality.T if kind.src_is_user else Modality.X
    return Modality.T if kind.dst_is_user else Modality.X


def link_subset(subset: Subset, target: Modality, snapshot: DatasetSnapshot) -> Subset:
    """Add the one-hop shared-ID closure in the target modality.

    X->T adds authors, T->X adds authored posts, N->T/X adds edge endpoints,
    T/X->N adds edges whose both endpoints already sit in the subset.
    """
    if target is Modality.T:
        added = {snapshot.posts[pid].author_id for pid in subset.X if pid in snapshot.posts}
        for eid in subset.N:
            e = snapshot.edges[eid]
            if e.kind.src_is_user:
                added.add(e.src_id)
            if e.kind.dst_is_user:
                added.add(e.dst_id)
        return subset.replace(Modality.T, subset.T | added)
    if target is Modality.X:
        added = set()
        for uid in subset.T:
            added.update(snapshot.posts_by_author.get(uid, ()))
        for eid in subset.N:
            e = snapshot.edges[eid]
            if not e.kind.src_is_user:
                added.add(e.src_id)
            if not e.kind.dst_is_user:
                added.add(e.dst_id)
        return subset.replace(Modality.X, subset.X | added)
    pool = subset.T | subset.X
    added = set()
    for uid_or_pid in sorted(pool):
        for eid in snapshot.edges_by_src.get(uid_or_pid, ()):
            e = snapshot.edges[eid]
            if e.src_id in pool and e.dst_id in pool:
                added.add(eid)
    return subset.replace(Modality.N, subset.N | added)


def _match_terms(text: str, terms: tuple[str, ...]) -> bool:
    toks = set(tokenize(text))
    for term in terms:
        needed = tokenize(term)
        if needed and all(t in toks for t in needed):
            return True
    return False


def execute_step(step: QueryStep, snapshot: DatasetSnapshot, input_subset: Subset) -> Subset:
    p = step.params
    op = step.operation

    if op is Op.EXPAND_MODALITY:
        target: Modality = p["target"]
        if p["scope"] == "universe":
            universe = {
                Modality.T: snapshot.users, Modality.X: snapshot.posts, Modality.N: snapshot.edges,
            }[target]
            return input_subset.replace(target, input_subset.ids(target) | set(universe))
        return link_subset(input_subset, target, snapshot)

    if op is Op.FILTER_ATTR:
        attr, cmp_, value = p["attr"], p["cmp"], p["value"]
        modality = FILTER_ATTRS[attr][0]
        table = snapshot.users if modality is Modality.T else snapshot.posts
        keep = set()
        for rid in input_subset.ids(modality):
            record = table.get(rid)
            if record is None:
                raise QueryExecutionError(f"unknown id {rid!r} for attribute {attr}")
            if _CMP[cmp_](getattr(record, attr), value):
                keep.add(rid)
        return input_subset.replace(modality, keep)

    if op is Op.TEXT_SEARCH:
        terms = p["terms"]
        single_tokens = [t.lower() for t in terms if len(tokenize(t)) == 1]
        if len(single_tokens) == len(terms):
            hits: set[str] = set()
            for tok in single_tokens:
                hits.update(snapshot.posts_with_token(tok))
            keep = input_subset.X & hits
        else:
            keep = {pid for pid in input_subset.X
                    if _match_terms(snapshot.posts[pid].text, terms)}
        return input_subset.replace(Modality.X, keep)

    if op is Op.TIME_WINDOW:
        window = set(snapshot.posts_in_window(p["start"], p["end"]))
        return input_subset.replace(Modality.X, input_subset.X & window)

    if op is Op.TRAVERSE_EDGE:
        kind: EdgeKind = p["kind"]
        direction = p["direction"]
        new_t, new_x, new_n = set(), set(), set()
        src_mod = _endpoint_modality(kind, "src")
        dst_mod = _endpoint_modality(kind, "dst")

        def walk(seed_ids, index, other_end, added_mod):
            for sid in seed_ids:
                for eid in index.get(sid, ()):
                    e = snapshot.edges[eid]
                    if e.kind is not kind:
                        continue
                    new_n.add(eid)
                    oid = getattr(e, other_end)
                    (new_t if added_mod is Modality.T else new_x).add(oid)

        if direction in ("out", "both"):
            walk(input_subset.ids(src_mod), snapshot.edges_by_src, "dst_id", dst_mod)
        if direction in ("in", "both"):
            walk(input_subset.ids(dst_mod), snapshot.edges_by_dst, "src_id", src_mod)
        out = input_subset
        if new_t:
            out = out.replace(Modality.T, out.T | new_t)
        if new_x:
            out = out.replace(Modality.X, out.X | new_x)
        if new_n:
            out = out.replace(Modality.N, out.N | new_n)
        return out

    # SampleTopK
    key, k, desc = p["order_key"], p["k"], p["descending"]
    modality = Modality.T if key in ("follower_count", "following_count") else Modality.X
    table = snapshot.users if modality is Modality.T else snapshot.posts
    ids = sorted(input_subset.ids(modality))
    ranked = sorted(ids, key=lambda rid: ((-getattr(table[rid], key)) if desc
                                          else getattr(table[rid], key), rid))
    return input_subset.replace(modality, ranked[:k])


@dataclass
class ChainResult:
    subset: Subset
    step_stats: list[dict] = field(default_factory=list)


def execute_chain(chain: QueryChain, snapshot: DatasetSnapshot,
                  initial: Subset | None = None) -> ChainResult:
    """Left-fold of execute_step from the source subset. Per-step
    cardinalities are recorded for the planner's result payload."""
    if isinstance(chain.source, SourceNode):
        if initial is None:
            raise QueryExecutionError(
                f"chain sourced from node {chain.source.node_id} needs an initial subset")
        current = initial
    else:
        current = snapshot.empty_subset()
    stats: list[dict] = []
    for i, step in enumerate(chain.steps):
        try:
            current = execute_step(step, snapshot, current)
        except QueryExecutionError as exc:
            raise QueryExecutionError(f"step {i}: {exc.args[0]}", i) from None
        stats.append({"step": i, "T": len(current.T), "X": len(current.X), "N": len(current.N)})
    return ChainResult(subset=current, step_stats=stats)
