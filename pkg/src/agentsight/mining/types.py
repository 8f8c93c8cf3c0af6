"""Typed payloads flowing through the mining stage.

AssembledData variants are the task-ready formats the mining coordinator
produces; MiningResult variants are what miners emit. Doc/node ids always
resolve in the source snapshot.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence


@dataclass(frozen=True)
class DocTermMatrix:
    doc_ids: tuple[str, ...]
    vocab: tuple[str, ...]
    # per-doc sparse counts: ((word_index, count), ...) sorted by word index
    counts: tuple[tuple[tuple[int, int], ...], ...]
    timestamps: tuple[float, ...] | None = None

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    def doc_tokens(self, i: int) -> list[int]:
        out: list[int] = []
        for w, c in self.counts[i]:
            out.extend([w] * c)
        return out

    def doc_frequency(self) -> dict[int, int]:
        df: dict[int, int] = {}
        for row in self.counts:
            for w, _ in row:
                df[w] = df.get(w, 0) + 1
        return df

    def co_document_frequency(self, word_indices: Sequence[int]) -> dict[tuple[int, int], int]:
        wanted = set(word_indices)
        pairs: dict[tuple[int, int], int] = {}
        for row in self.counts:
            present = sorted(w for w, _ in row if w in wanted)
            for a in range(len(present)):
                for b in range(a + 1, len(present)):
                    key = (present[a], present[b])
                    pairs[key] = pairs.get(key, 0) + 1
        return pairs


@dataclass(frozen=True)
class WeightedGraph:
    node_ids: tuple[str, ...]
    # directed multi-edges aggregated to (src_index, dst_index) -> weight
    edges: tuple[tuple[int, int, float], ...]
    node_attrs: Mapping[str, tuple] = field(default_factory=dict)
    edge_times: tuple[float | None, ...] | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    def undirected_edges(self) -> list[tuple[int, int, float]]:
        """Symmetrized view: (i, j, w) with i <= j, parallel edges summed."""
        agg: dict[tuple[int, int], float] = {}
        for s, d, w in self.edges:
            key = (s, d) if s <= d else (d, s)
            agg[key] = agg.get(key, 0.0) + w
        return [(i, j, w) for (i, j), w in sorted(agg.items())]


@dataclass(frozen=True)
class TimeSeries:
    bin_edges: tuple[float, ...]  # UTC epoch seconds, len == len(values) + 1
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.bin_edges) != len(self.values) + 1:
            raise ValueError("bin_edges must have len(values) + 1 entries")


@dataclass(frozen=True)
class LabeledTexts:
    items: tuple[tuple[str, str], ...]  # (id, text)


AssembledPayload = DocTermMatrix | WeightedGraph | TimeSeries | LabeledTexts


@dataclass(frozen=True)
class AssembledData:
    method_id: str
    payload: AssembledPayload
    meta: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class TopicSet:
    vocab: tuple[str, ...]
    doc_ids: tuple[str, ...]
    topic_word: tuple[tuple[float, ...], ...]  # k x V, rows sum to 1
    doc_topic: tuple[tuple[float, ...], ...]   # n x k, rows sum to 1
    coherence: tuple[float, ...]               # UMass per topic
    mean_coherence: float

    @property
    def n_topics(self) -> int:
        return len(self.topic_word)

    def top_words(self, topic: int, n: int = 10) -> list[tuple[str, float]]:
        row = self.topic_word[topic]
        order = sorted(range(len(row)), key=lambda w: (-row[w], self.vocab[w]))
        return [(self.vocab[w], row[w]) for w in order[:n]]


@dataclass(frozen=True)
class Partition:
    node_ids: tuple[str, ...]
    labels: tuple[int, ...]
    modularity: float                       # at the run's resolution
    standard_modularity: float = 0.0        # resolution 1.0, comparable across runs
    pass_modularities: tuple[float, ...] = ()

    def communities(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for nid, lab in zip(self.node_ids, self.labels):
            out.setdefault(lab, []).append(nid)
        return {lab: sorted(members) for lab, members in sorted(out.items())}


@dataclass(frozen=True)
class ScoreMap:
    node_ids: tuple[str, ...]
    scores: tuple[float, ...]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.node_ids, self.scores))


@dataclass(frozen=True)
class ChangePoints:
    indices: tuple[int, ...]  # strictly increasing bin indices
    series: TimeSeries
    segment_means: tuple[float, ...] = ()

    def __post_init__(self):
        if list(self.indices) != sorted(set(self.indices)):
            raise ValueError("change-point indices must be strictly increasing")
        if self.indices and not (0 < self.indices[0] and self.indices[-1] < len(self.series.values)):
            raise ValueError("change-point index out of range")


@dataclass(frozen=True)
class SentimentDist:
    positive: float
    negative: float
    neutral: float
    n_docs: int
    per_bin: tuple[tuple[float, float, float], ...] | None = None


@dataclass(frozen=True)
class StanceDist:
    fractions: Mapping[str, float]
    n_docs: int


@dataclass(frozen=True)
class Phase:
    label: str
    start: float
    end: float
    payload: "TopicSet | Partition"


@dataclass(frozen=True)
class PhaseSeries:
    """Composite output of the dynamic re-run methods: the binned volume
    series, detected change points, and one inner result per phase."""

    series: TimeSeries
    change_points: tuple[int, ...]
    phases: tuple[Phase, ...]


ResultPayload = (TopicSet | Partition | ScoreMap | ChangePoints
                 | SentimentDist | StanceDist | TimeSeries | PhaseSeries)


@dataclass(frozen=True)
class MiningResult:
    method_id: str
    params: Mapping[str, object]
    payload: ResultPayload
    provenance: Mapping[str, object] = field(default_factory=dict)
    converged: bool = True
    iterations: int = 0


def subset_fingerprint(t_ids, x_ids, n_ids) -> str:
    h = hashlib.sha256()
    h.update(json.dumps([sorted(t_ids), sorted(x_ids), sorted(n_ids)]).encode())
    return h.hexdigest()[:16]


def derive_seed(base: int, salt: int) -> int:
    """Deterministic child seed; used for stability re-runs and per-phase runs."""
    h = hashlib.sha256(f"{base}:{salt}".encode()).digest()
    return int.from_bytes(h[:8], "big") >> 1
