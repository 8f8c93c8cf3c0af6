"""Mining coordinator: turn a subset into the task-ready format a method
declares. Tabular attributes ride along as node features, network edges
define graph structure, text becomes a document-term matrix."""

from __future__ import annotations

from ..datastore import DatasetSnapshot, EdgeKind, Subset
from ..errors import AssemblyError
from ..textnorm import content_tokens
from .types import (AssembledData, DocTermMatrix, LabeledTexts, TimeSeries,
                    WeightedGraph, subset_fingerprint)
from .timeseries import bin_timestamps

INPUT_CLASS = {
    "lda_topics": "DocTermMatrix",
    "dynamic_topic_modeling": "DocTermMatrix",
    "lexicon_sentiment": "LabeledTexts",
    "keyword_stance": "LabeledTexts",
    "louvain_communities": "WeightedGraph",
    "dynamic_community_detection": "WeightedGraph",
    "pagerank": "WeightedGraph",
    "betweenness": "WeightedGraph",
    "kcore": "WeightedGraph",
    "time_binning": "TimeSeries",
    "change_point": "TimeSeries",
}

# kinds whose endpoints are both users; these induce the user graph
_USER_EDGE_KINDS = (EdgeKind.FOLLOWS,)


def build_doc_term_matrix(subset: Subset, snapshot: DatasetSnapshot,
                          with_timestamps: bool = False) -> DocTermMatrix:
    if not subset.X:
        raise AssemblyError("text assembly needs a non-empty X modality")
    doc_rows: list[tuple[str, dict[str, int]]] = []
    vocab_set: set[str] = set()
    for pid in sorted(subset.X):
        post = snapshot.posts[pid]
        counts: dict[str, int] = {}
        for tok in content_tokens(post.text):
            counts[tok] = counts.get(tok, 0) + 1
        if counts:
            doc_rows.append((pid, counts))
            vocab_set.update(counts)
    if not doc_rows:
        raise AssemblyError("no documents with content tokens after normalization")
    vocab = tuple(sorted(vocab_set))
    index = {w: i for i, w in enumerate(vocab)}
    doc_ids = tuple(pid for pid, _ in doc_rows)
    counts = tuple(
        tuple(sorted((index[w], c) for w, c in row.items()))
        for _, row in doc_rows
    )
    timestamps = None
    if with_timestamps:
        timestamps = tuple(snapshot.posts[pid].created_at for pid in doc_ids)
    return DocTermMatrix(doc_ids=doc_ids, vocab=vocab, counts=counts, timestamps=timestamps)


def build_user_graph(subset: Subset, snapshot: DatasetSnapshot,
                     with_times: bool = False) -> WeightedGraph:
    if not subset.T:
        raise AssemblyError("graph assembly needs a non-empty T modality")
    nodes = tuple(sorted(subset.T))
    index = {uid: i for i, uid in enumerate(nodes)}
    agg: dict[tuple[int, int], float] = {}
    times: list[float | None] = []
    flat: list[tuple[int, int, float]] = []
    for eid in sorted(subset.N):
        e = snapshot.edges[eid]
        if e.kind not in _USER_EDGE_KINDS:
            continue
        if e.src_id in index and e.dst_id in index:
            key = (index[e.src_id], index[e.dst_id])
            agg[key] = agg.get(key, 0.0) + 1.0
            if with_times:
                flat.append((key[0], key[1], 1.0))
                times.append(e.at)
    if not agg:
        raise AssemblyError("graph assembly needs user-user edges in N "
                            "(empty or incompatible N modality)")
    if with_times:
        edges = tuple(flat)
        edge_times: tuple[float | None, ...] | None = tuple(times)
    else:
        edges = tuple((s, d, w) for (s, d), w in sorted(agg.items()))
        edge_times = None
    attrs = {
        "follower_count": tuple(snapshot.users[u].follower_count for u in nodes),
        "following_count": tuple(snapshot.users[u].following_count for u in nodes),
        "verified": tuple(snapshot.users[u].verified for u in nodes),
    }
    return WeightedGraph(node_ids=nodes, edges=edges, node_attrs=attrs, edge_times=edge_times)


def build_time_series(subset: Subset, snapshot: DatasetSnapshot) -> TimeSeries:
    if not subset.X:
        raise AssemblyError("time-series assembly needs a non-empty X modality")
    timestamps = [snapshot.posts[pid].created_at for pid in sorted(subset.X)]
    return bin_timestamps(timestamps, "day")


def build_labeled_texts(subset: Subset, snapshot: DatasetSnapshot) -> LabeledTexts:
    if not subset.X:
        raise AssemblyError("text assembly needs a non-empty X modality")
    return LabeledTexts(items=tuple(
        (pid, snapshot.posts[pid].text) for pid in sorted(subset.X)
    ))


def assemble(subset: Subset, method_id: str, snapshot: DatasetSnapshot) -> AssembledData:
    """A: (T, X, N) -> D for the registered method's declared input class."""
    if method_id not in INPUT_CLASS:
        raise AssemblyError(f"unknown method {method_id!r}")
    if subset.snapshot_id != snapshot.snapshot_id:
        raise AssemblyError(
            f"subset references {subset.snapshot_id}, got snapshot {snapshot.snapshot_id}")
    cls = INPUT_CLASS[method_id]
    if cls == "DocTermMatrix":
        payload = build_doc_term_matrix(subset, snapshot,
                                        with_timestamps=method_id == "dynamic_topic_modeling")
    elif cls == "WeightedGraph":
        payload = build_user_graph(subset, snapshot,
                                   with_times=method_id == "dynamic_community_detection")
    elif cls == "TimeSeries":
        payload = build_time_series(subset, snapshot)
    else:
        payload = build_labeled_texts(subset, snapshot)
    meta = {
        "snapshot_id": snapshot.snapshot_id,
        "subset_hash": subset_fingerprint(subset.T, subset.X, subset.N),
        "input_class": cls,
    }
    if isinstance(payload, WeightedGraph):
        # symmetrized edge list rides along for force-graph layouts
        meta["graph_edges"] = [list(e) for e in payload.undirected_edges()]
    return AssembledData(method_id=method_id, payload=payload, meta=meta)
