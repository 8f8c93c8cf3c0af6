"""Branching analysis tree: context nodes, stage legality, control signals,
path contexts, uncertainty accumulation, and display aggregation.

Each node records a complete context (action, result, interpretation,
suggested next step). Prompts are built from the root-to-node path only;
sibling branches never leak into context.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .errors import PlannerError, TerminatedNodeError

KINDS = ("Root", "Direction", "Query", "Miner", "Visualizer", "Report")
STATUSES = ("Pending", "Done", "Pruned", "Terminated", "Failed")
SIGNALS = ("Navigate", "Terminate", "Prune")

ALLOWED_TRANSITIONS: frozenset[tuple[str, str]] = frozenset({
    ("Root", "Direction"),
    ("Direction", "Query"),
    ("Query", "Query"),  # chained refinement
    ("Query", "Miner"),
    ("Miner", "Visualizer"),
    ("Visualizer", "Report"),
})


@dataclass
class ContextNode:
    """<action, result, interpretation, next>; carries an explicit pending
    marker until all four components are recorded."""

    action: str
    result: Mapping | None = None
    interpretation: Mapping | None = None  # {"reasons": str, "evaluation": str}
    next_step: str | None = None
    pending: bool = True

    def complete(self, result: Mapping, interpretation: Mapping, next_step: str) -> None:
        self.result = dict(result)
        self.interpretation = dict(interpretation)
        self.next_step = next_step
        self.pending = False

    def to_dict(self) -> dict:
        return {
            "action": self.action,
            "result": self.result,
            "interpretation": self.interpretation,
            "next": self.next_step,
            "pending": self.pending,
        }


@dataclass(frozen=True)
class ControlSignal:
    kind: str
    reason: str

    def __post_init__(self):
        if self.kind not in SIGNALS:
            raise PlannerError(f"unknown signal {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "reason": self.reason}


@dataclass
class TreeNode:
    node_id: str
    kind: str
    context: ContextNode
    parent: str | None
    children: list[str] = field(default_factory=list)
    status: str = "Pending"
    u_contrib: float = 0.0
    signal: ControlSignal | None = None
    label: str = ""

    def to_dict(self) -> dict:
        return {
            "node_id": self.node_id,
            "kind": self.kind,
            "parent": self.parent,
            "children": list(self.children),
            "status": self.status,
            "u_contrib": self.u_contrib,
            "signal": self.signal.to_dict() if self.signal else None,
            "label": self.label,
            "context": self.context.to_dict(),
        }


@dataclass(frozen=True)
class Thresholds:
    navigate: float = 0.6
    prune: float = 0.3
    depth_cap: int = 8
    max_retries: int = 2

    def __post_init__(self):
        if not 0.0 <= self.prune <= self.navigate <= 1.0:
            raise PlannerError("thresholds must satisfy 0 <= prune <= navigate <= 1")


class AgentTree:
    """Exactly one root; every mutation checks stage-transition legality."""

    def __init__(self, goal: str):
        self._counter = 0
        self.nodes: dict[str, TreeNode] = {}
        root = TreeNode(
            node_id=self._next_id(), kind="Root",
            context=ContextNode(action=f"analyze goal: {goal}"),
            parent=None, label=goal,
        )
        self.nodes[root.node_id] = root
        self.root_id = root.node_id
        self.goal = goal

    def _next_id(self) -> str:
        self._counter += 1
        return f"n{self._counter:04d}"

    def get(self, node_id: str) -> TreeNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise PlannerError(f"unknown node {node_id!r}") from None

    def add_child(self, parent_id: str, kind: str, action: str, label: str = "") -> TreeNode:
        parent = self.get(parent_id)
        if kind not in KINDS:
            raise PlannerError(f"unknown node kind {kind!r}")
        if (parent.kind, kind) not in ALLOWED_TRANSITIONS:
            raise PlannerError(f"illegal transition {parent.kind} -> {kind}")
        if parent.signal is not None and parent.signal.kind in ("Terminate", "Prune"):
            raise TerminatedNodeError(
                f"node {parent_id} carries {parent.signal.kind}; no further children")
        if parent.status in ("Terminated", "Pruned"):
            raise TerminatedNodeError(f"node {parent_id} is {parent.status}")
        node = TreeNode(node_id=self._next_id(), kind=kind,
                        context=ContextNode(action=action), parent=parent_id,
                        label=label or action)
        self.nodes[node.node_id] = node
        parent.children.append(node.node_id)
        return node

    def path(self, node_id: str) -> list[TreeNode]:
        """Root-to-node ancestor chain; sibling branches excluded."""
        chain: list[TreeNode] = []
        cur: str | None = node_id
        while cur is not None:
            node = self.get(cur)
            chain.append(node)
            cur = node.parent
        return list(reversed(chain))

    def path_context(self, node_id: str) -> list[ContextNode]:
        return [n.context for n in self.path(node_id)]

    def depth(self, node_id: str) -> int:
        return len(self.path(node_id))

    def descendants(self, node_id: str) -> list[str]:
        out: list[str] = []
        stack = [node_id]
        while stack:
            cur = stack.pop()
            for child in self.get(cur).children:
                out.append(child)
                stack.append(child)
        return sorted(out)

    def remove_subtree(self, node_id: str) -> list[str]:
        """Detach node and its descendants (used when downstream stages are
        regenerated after a re-ranking). Returns removed ids."""
        node = self.get(node_id)
        removed = [node_id] + self.descendants(node_id)
        for rid in removed:
            self.nodes.pop(rid, None)
        if node.parent is not None:
            self.get(node.parent).children.remove(node_id)
        return removed

    def to_dict(self) -> dict:
        return {
            "goal": self.goal,
            "root": self.root_id,
            "nodes": [self.nodes[k].to_dict() for k in sorted(self.nodes)],
        }

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def decide_signal(score: float | None, stage: str, depth: int,
                  thresholds: Thresholds) -> ControlSignal:
    """Report stage and the depth cap terminate; low scores prune; good
    scores navigate; the band between the thresholds terminates the branch
    without pruning it."""
    if stage == "Report":
        return ControlSignal("Terminate", "report is the terminal stage")
    if depth >= thresholds.depth_cap:
        return ControlSignal("Terminate", f"depth cap {thresholds.depth_cap} reached")
    if score is None:
        return ControlSignal("Navigate", "no stage score; proceeding")
    if score < thresholds.prune:
        return ControlSignal("Prune", f"score {score:.3f} below prune threshold "
                                      f"{thresholds.prune}")
    if score >= thresholds.navigate:
        return ControlSignal("Navigate", f"score {score:.3f} at or above navigate "
                                         f"threshold {thresholds.navigate}")
    return ControlSignal("Terminate", f"score {score:.3f} between thresholds; "
                                      "keeping result without extending")


def accumulate_uncertainty(tree: AgentTree, node_id: str) -> float:
    """u_path = 1 - prod(1 - u_contrib) over Miner nodes on the root-to-node
    path (the node itself included; non-Miner nodes contribute 0)."""
    acc = 1.0
    for node in tree.path(node_id):
        if node.kind == "Miner":
            acc *= (1.0 - node.u_contrib)
    return 1.0 - acc


@dataclass
class DisplayNode:
    display_id: str
    kind: str
    label: str
    raw_node_ids: list[str]
    children: list["DisplayNode"] = field(default_factory=list)
    collapsed: bool = False
    status: str = "Pending"
    signal: dict | None = None
    badge: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "display_id": self.display_id,
            "kind": self.kind,
            "label": self.label,
            "raw_node_ids": list(self.raw_node_ids),
            "collapsed": self.collapsed,
            "status": self.status,
            "signal": self.signal,
            "badge": dict(self.badge),
            "children": [c.to_dict() for c in self.children],
        }


def aggregate_for_display(tree: AgentTree,
                          miner_badges: Mapping[str, Mapping] | None = None) -> DisplayNode:
    """Merge consecutive query chains into single display nodes, badge miner
    nodes with their configuration counts (full grid behind expansion), and
    collapse pruned/failed branches while keeping them reachable."""
    badges = miner_badges or {}

    def build(node_id: str) -> DisplayNode:
        node = tree.get(node_id)
        raw = [node_id]
        labels = [node.label]
        tail = node
        while (node.kind == "Query" and len(tail.children) == 1
               and tree.get(tail.children[0]).kind == "Query"):
            tail = tree.get(tail.children[0])
            raw.append(tail.node_id)
            labels.append(tail.label)
        display = DisplayNode(
            display_id=f"d-{raw[0]}",
            kind=node.kind,
            label=" ; ".join(labels) if len(labels) > 1 else labels[0],
            raw_node_ids=raw,
            collapsed=tail.status in ("Pruned", "Failed"),
            status=tail.status,
            signal=tail.signal.to_dict() if tail.signal else None,
        )
        if len(raw) > 1:
            display.badge["merged_queries"] = len(raw)
        if node.kind == "Miner" and node.node_id in badges:
            display.badge.update(badges[node.node_id])
        for child_id in tail.children:
            display.children.append(build(child_id))
        return display

    return build(tree.root_id)


def display_ids(display: DisplayNode) -> list[str]:
    out = list(display.raw_node_ids)
    for c in display.children:
        out.extend(display_ids(c))
    return out


def build_path_context_text(tree: AgentTree, node_id: str) -> str:
    """Prompt section derived from the analysis path only."""
    lines = []
    for node in tree.path(node_id):
        ctx = node.context
        parts = [f"[{node.kind} {node.node_id}] action: {ctx.action}"]
        if ctx.result is not None:
            parts.append(f"result: {json.dumps(ctx.result, sort_keys=True, default=str)}")
        if ctx.interpretation is not None:
            parts.append(f"interpretation: {json.dumps(ctx.interpretation, sort_keys=True)}")
        if ctx.next_step:
            parts.append(f"next: {ctx.next_step}")
        lines.append(" | ".join(parts))
    return "\n".join(lines)
