"""Dynamic method variants, expressed as per-phase re-runs of static miners.

dynamic_topic_modeling: bin post volume, detect change points, run LDA per
phase. dynamic_community_detection: split the timed edge stream into equal
windows and run Louvain per window.
"""

from __future__ import annotations

from ..errors import MiningError
from .graph import louvain
from .timeseries import BIN_SECONDS, bin_timestamps, change_point, rebin
from .topics import run_lda
from .types import (DocTermMatrix, Phase, PhaseSeries, TimeSeries, WeightedGraph,
                    derive_seed)


def slice_dtm(dtm: DocTermMatrix, indices: list[int]) -> DocTermMatrix:
    """Sub-corpus with a re-derived vocabulary restricted to used words."""
    used: set[int] = set()
    for i in indices:
        used.update(w for w, _ in dtm.counts[i])
    keep = sorted(used)
    remap = {w: j for j, w in enumerate(keep)}
    return DocTermMatrix(
        doc_ids=tuple(dtm.doc_ids[i] for i in indices),
        vocab=tuple(dtm.vocab[w] for w in keep),
        counts=tuple(tuple((remap[w], c) for w, c in dtm.counts[i]) for i in indices),
        timestamps=tuple(dtm.timestamps[i] for i in indices) if dtm.timestamps else None,
    )


def dynamic_topic_modeling(dtm: DocTermMatrix, *, bin: str | float = "week",
                           penalty: float = 0.0, min_segment: int = 2,
                           max_changepoints: int | None = None, k: int = 5,
                           alpha: float = 0.1, beta: float = 0.01,
                           iterations: int = 60, seed: int = 0,
                           kernel=None) -> tuple[PhaseSeries, bool, int]:
    if dtm.timestamps is None:
        raise MiningError("dynamic topic modeling needs document timestamps")
    series = bin_timestamps(list(dtm.timestamps), bin)
    cp = change_point(series, penalty=penalty, min_segment=min_segment,
                      max_changepoints=max_changepoints)
    bounds = [0] + list(cp.indices) + [len(series.values)]
    phases: list[Phase] = []
    for pi, (a, b) in enumerate(zip(bounds, bounds[1:])):
        start, end = series.bin_edges[a], series.bin_edges[b]
        idx = [i for i, ts in enumerate(dtm.timestamps) if start <= ts < end]
        if not idx:
            continue
        sub = slice_dtm(dtm, idx)
        kw = {"kernel": kernel} if kernel is not None else {}
        topic_set = run_lda(sub, k=k, alpha=alpha, beta=beta, iterations=iterations,
                            seed=derive_seed(seed, pi), **kw)
        phases.append(Phase(label=f"phase-{pi + 1}", start=start, end=end, payload=topic_set))
    if not phases:
        raise MiningError("no phase contains any documents")
    return PhaseSeries(series=series, change_points=cp.indices,
                       phases=tuple(phases)), True, iterations


def dynamic_community_detection(graph: WeightedGraph, *, phases: int = 3,
                                resolution: float = 1.0,
                                seed: int = 0) -> tuple[PhaseSeries, bool, int]:
    if graph.edge_times is None:
        raise MiningError("dynamic community detection needs edge timestamps")
    timed = [(t, e) for t, e in zip(graph.edge_times, graph.edges) if t is not None]
    if not timed:
        raise MiningError("no timed edges to window")
    if phases < 1:
        raise MiningError("phases must be >= 1")
    t_min = min(t for t, _ in timed)
    t_max = max(t for t, _ in timed)
    span = max(t_max - t_min, 1.0)
    width = span / phases
    edges_per_window: list[list[tuple[int, int, float]]] = [[] for _ in range(phases)]
    for t, (s, d, w) in timed:
        wi = min(int((t - t_min) / width), phases - 1)
        edges_per_window[wi].append((s, d, w))
    out_phases: list[Phase] = []
    values = []
    edges_axis = [t_min + i * width for i in range(phases + 1)]
    for pi, window_edges in enumerate(edges_per_window):
        values.append(float(len(window_edges)))
        if not window_edges:
            continue
        agg: dict[tuple[int, int], float] = {}
        for s, d, w in window_edges:
            agg[(s, d)] = agg.get((s, d), 0.0) + w
        sub = WeightedGraph(
            node_ids=graph.node_ids,
            edges=tuple((s, d, w) for (s, d), w in sorted(agg.items())),
            node_attrs=graph.node_attrs,
        )
        part = louvain(sub, resolution=resolution, seed=derive_seed(seed, pi))
        out_phases.append(Phase(label=f"window-{pi + 1}", start=edges_axis[pi],
                                end=edges_axis[pi + 1], payload=part))
    if not out_phases:
        raise MiningError("every window is empty")
    series = TimeSeries(bin_edges=tuple(edges_axis), values=tuple(values))
    return PhaseSeries(series=series, change_points=(), phases=tuple(out_phases)), True, phases


__all__ = ["dynamic_topic_modeling", "dynamic_community_detection", "slice_dtm",
           "BIN_SECONDS", "rebin"]
