"""Graph miners: Louvain modularity optimization, PageRank power iteration,
Brandes betweenness, k-core peeling. All written for desk-scale graphs and
fully deterministic given their parameters."""

from __future__ import annotations

import random
from collections import deque

from ..errors import MiningError
from .types import Partition, ScoreMap, WeightedGraph


def modularity(n_nodes: int, und_edges: list[tuple[int, int, float]],
               labels: list[int], resolution: float = 1.0) -> float:
    """Q = sum_c [ in_c/(2m) - gamma * (tot_c/(2m))^2 ] on the symmetrized
    graph; self-loops contribute their full weight to in_c and twice to
    degree, matching the adjacency-matrix convention A_ii = 2w."""
    two_m = 0.0
    degree = [0.0] * n_nodes
    for i, j, w in und_edges:
        if i == j:
            degree[i] += 2.0 * w
            two_m += 2.0 * w
        else:
            degree[i] += w
            degree[j] += w
            two_m += 2.0 * w
    if two_m == 0.0:
        raise MiningError("modularity undefined on an edgeless graph")
    internal: dict[int, float] = {}
    total: dict[int, float] = {}
    for i, j, w in und_edges:
        if labels[i] == labels[j]:
            internal[labels[i]] = internal.get(labels[i], 0.0) + (2.0 * w)
    for i in range(n_nodes):
        total[labels[i]] = total.get(labels[i], 0.0) + degree[i]
    q = 0.0
    for c in sorted(total):
        q += internal.get(c, 0.0) / two_m - resolution * (total[c] / two_m) ** 2
    return q


class _Aggregate:
    """Mutable working graph for one Louvain pass."""

    def __init__(self, n: int, und_edges: list[tuple[int, int, float]]):
        self.n = n
        self.adj: list[dict[int, float]] = [dict() for _ in range(n)]
        self.self_loops = [0.0] * n
        self.degree = [0.0] * n
        self.two_m = 0.0
        for i, j, w in und_edges:
            if i == j:
                self.self_loops[i] += w
                self.degree[i] += 2.0 * w
                self.two_m += 2.0 * w
            else:
                self.adj[i][j] = self.adj[i].get(j, 0.0) + w
                self.adj[j][i] = self.adj[j].get(i, 0.0) + w
                self.degree[i] += w
                self.degree[j] += w
                self.two_m += 2.0 * w

    def edges(self) -> list[tuple[int, int, float]]:
        out = [(i, i, w) for i, w in enumerate(self.self_loops) if w != 0.0]
        for i in range(self.n):
            for j, w in sorted(self.adj[i].items()):
                if i < j:
                    out.append((i, j, w))
        return sorted(out)


def _local_move(g: _Aggregate, resolution: float, rng: random.Random) -> list[int]:
    labels = list(range(g.n))
    comm_tot = list(g.degree)
    order = list(range(g.n))
    improved = True
    while improved:
        improved = False
        rng.shuffle(order)
        for i in order:
            ci = labels[i]
            ki = g.degree[i]
            # weights from i to each neighboring community
            links: dict[int, float] = {}
            for j, w in g.adj[i].items():
                links[labels[j]] = links.get(labels[j], 0.0) + w
            comm_tot[ci] -= ki
            base = links.get(ci, 0.0)
            best_c, best_gain = ci, 0.0
            for c in sorted(links):
                # gain of joining c relative to rejoining ci, with i removed
                # from ci; the k_i^2 null-model term cancels between the two.
                gain = 2.0 * (links[c] - base) / g.two_m \
                    - resolution * 2.0 * ki * (comm_tot[c] - comm_tot[ci]) / (g.two_m * g.two_m)
                if gain > best_gain + 1e-15 or (abs(gain - best_gain) <= 1e-15 and c < best_c and gain > 0.0):
                    best_c, best_gain = c, gain
            comm_tot[best_c] += ki
            if best_c != ci:
                labels[i] = best_c
                improved = True
    return labels


def _renumber(labels: list[int]) -> tuple[list[int], int]:
    mapping: dict[int, int] = {}
    out = []
    for lab in labels:
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out.append(mapping[lab])
    return out, len(mapping)


def louvain(graph: WeightedGraph, resolution: float = 1.0, seed: int = 0) -> Partition:
    und = graph.undirected_edges()
    if not und:
        raise MiningError("louvain needs at least one edge")
    n = graph.n_nodes
    rng = random.Random(seed)

    node_to_orig = [[i] for i in range(n)]  # aggregate node -> original nodes
    final_labels = [0] * n
    g = _Aggregate(n, und)
    passes: list[float] = []
    prev_q = modularity(n, und, list(range(n)), resolution)

    while True:
        labels = _local_move(g, resolution, rng)
        labels, n_comm = _renumber(labels)
        for agg_node, lab in enumerate(labels):
            for orig in node_to_orig[agg_node]:
                final_labels[orig] = lab
        q = modularity(n, und, final_labels, resolution)
        passes.append(q)
        if q <= prev_q + 1e-12 and len(passes) > 1:
            break
        if n_comm == g.n:
            break
        prev_q = q
        # aggregate: communities become nodes
        new_edges: dict[tuple[int, int], float] = {}
        for i, j, w in g.edges():
            a, b = labels[i], labels[j]
            key = (a, b) if a <= b else (b, a)
            new_edges[key] = new_edges.get(key, 0.0) + w
        grouped: list[list[int]] = [[] for _ in range(n_comm)]
        for agg_node, lab in enumerate(labels):
            grouped[lab].extend(node_to_orig[agg_node])
        node_to_orig = grouped
        g = _Aggregate(n_comm, [(i, j, w) for (i, j), w in sorted(new_edges.items())])

    final_labels, _ = _renumber(final_labels)
    q_final = modularity(n, und, final_labels, resolution)
    q_standard = q_final if resolution == 1.0 else modularity(n, und, final_labels, 1.0)
    return Partition(
        node_ids=graph.node_ids,
        labels=tuple(final_labels),
        modularity=q_final,
        standard_modularity=q_standard,
        pass_modularities=tuple(passes),
    )


def pagerank(graph: WeightedGraph, damping: float = 0.85, tol: float = 1e-10,
             max_iter: int = 500) -> tuple[ScoreMap, bool, int]:
    """Power iteration on the weighted out-degree-normalized transition
    matrix with uniform teleport and uniform dangling redistribution."""
    n = graph.n_nodes
    if n == 0 or not graph.edges:
        raise MiningError("pagerank needs a non-empty graph")
    out_weight = [0.0] * n
    in_edges: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for s, d, w in sorted(graph.edges):
        out_weight[s] += w
        in_edges[d].append((s, w))
    x = [1.0 / n] * n
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        dangling = 0.0
        for i in range(n):
            if out_weight[i] == 0.0:
                dangling += x[i]
        base = (1.0 - damping) / n + damping * dangling / n
        nxt = [0.0] * n
        for d in range(n):
            acc = 0.0
            for s, w in in_edges[d]:
                acc += x[s] * (w / out_weight[s])
            nxt[d] = base + damping * acc
        diff = 0.0
        for i in range(n):
            diff += abs(nxt[i] - x[i])
        x = nxt
        if diff <= tol:
            converged = True
            break
    return ScoreMap(node_ids=graph.node_ids, scores=tuple(x)), converged, it


def betweenness(graph: WeightedGraph, normalized: bool = True) -> ScoreMap:
    """Brandes' algorithm on the unweighted, undirected view."""
    n = graph.n_nodes
    adj: list[list[int]] = [[] for _ in range(n)]
    seen: set[tuple[int, int]] = set()
    for i, j, _ in graph.undirected_edges():
        if i == j or (i, j) in seen:
            continue
        seen.add((i, j))
        adj[i].append(j)
        adj[j].append(i)
    for neighbors in adj:
        neighbors.sort()

    cb = [0.0] * n
    for s in range(n):
        stack: list[int] = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0.0] * n
        dist = [-1] * n
        sigma[s] = 1.0
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                cb[w] += delta[w]
        # undirected: every pair counted twice
    cb = [c / 2.0 for c in cb]
    if normalized and n > 2:
        scale = 2.0 / ((n - 1) * (n - 2))
        cb = [c * scale for c in cb]
    return ScoreMap(node_ids=graph.node_ids, scores=tuple(cb))


def kcore(graph: WeightedGraph) -> ScoreMap:
    """Core number per node by iterative peeling (unweighted degrees)."""
    n = graph.n_nodes
    adj: list[set[int]] = [set() for _ in range(n)]
    for i, j, _ in graph.undirected_edges():
        if i != j:
            adj[i].add(j)
            adj[j].add(i)
    degree = [len(a) for a in adj]
    core = [0] * n
    remaining = set(range(n))
    k = 0
    while remaining:
        k_candidates = sorted(v for v in remaining if degree[v] <= k)
        if not k_candidates:
            k += 1
            continue
        queue = deque(k_candidates)
        while queue:
            v = queue.popleft()
            if v not in remaining:
                continue
            if degree[v] > k:
                continue
            core[v] = k
            remaining.discard(v)
            for w in adj[v]:
                if w in remaining:
                    degree[w] -= 1
                    if degree[w] <= k:
                        queue.append(w)
    return ScoreMap(node_ids=graph.node_ids, scores=tuple(float(c) for c in core))
