"""Session orchestration: drives goal -> query -> mine -> visualize -> report
over the agent tree, one stage agent per step, with per-branch failure
isolation and full context recorded on every node."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from .config import EngineConfig
from .datastore import DatasetSnapshot, Subset, subset_stats
from .errors import (AgentSightError, GatewayError, PlannerError,
                     QueryExecutionError, TerminatedNodeError)
from .gateway import Gateway, LlmAction, PromptSections
from .mining import assemble, registered_method_ids
from .mining.evaluate import GridEntry, grid_search, select_best
from .mining.types import AssembledData, MiningResult
from .planner import (AgentTree, ControlSignal, TreeNode, accumulate_uncertainty,
                      aggregate_for_display, build_path_context_text, decide_signal)
from .query import SourceNode, execute_chain, parse_query, pretty_print
from .reporting import Report, compose_report, evaluate_report
from .taxonomy import TaxonomyIndex, match_directions
from .viz import (LayoutPlan, VizEval, VizSpec, atomize, bind_elements,
                  evaluate_view, generate_specs, integrate_or_coordinate, trace,
                  trace_via)


def _u_method_lookup(index: TaxonomyIndex) -> dict[str, float]:
    """Lowest prior across all taxonomy cells that map to each registry id."""
    out: dict[str, float] = {}
    for row in index.rows.values():
        for ref in row.static_methods + row.dynamic_methods:
            if ref.impl:
                out[ref.impl] = min(out.get(ref.impl, 1.0), ref.u_method)
    return out


@dataclass
class MinerState:
    method_id: str
    entries: list[GridEntry]
    data: AssembledData
    best_index: int
    u_method: float


@dataclass
class SessionState:
    """Runtime artifacts keyed by node or viz id."""

    subsets: dict[str, Subset] = field(default_factory=dict)
    refine_flags: dict[str, bool] = field(default_factory=dict)
    miners: dict[str, MinerState] = field(default_factory=dict)
    specs: dict[str, VizSpec] = field(default_factory=dict)
    viz_evals: dict[str, VizEval] = field(default_factory=dict)
    spec_nodes: dict[str, str] = field(default_factory=dict)
    layouts: dict[str, LayoutPlan] = field(default_factory=dict)


class Session:
    """One analysis per session; all tree mutations run under the writer
    lock, so concurrent readers always see a consistent tree."""

    def __init__(self, session_id: str, snapshot: DatasetSnapshot, config: EngineConfig,
                 gateway: Gateway, taxonomy: TaxonomyIndex,
                 clock: Callable[[], float] | None = None):
        self.session_id = session_id
        self.snapshot = snapshot
        self.config = config
        self.gateway = gateway
        self.taxonomy = taxonomy
        self.clock = clock or self._next_tick
        self.tree: AgentTree | None = None
        self.state = SessionState()
        self.report: Report | None = None
        self.report_node: str | None = None
        self.report_plan: LayoutPlan | None = None
        self.link_graph = None
        self.data_items: list = []
        self.advisory: str | None = None
        self.events: list[dict] = []
        self.lock = threading.RLock()
        self._weights = config.eval_weights()
        self._viz_weights = config.viz_eval_weights()
        self._report_weights = config.report_eval_weights()
        self._thresholds = config.planner_thresholds()
        self._u_methods = _u_method_lookup(taxonomy)

    # -- helpers --------------------------------------------------------------

    def _next_tick(self) -> float:
        """Logical clock: deterministic timestamps for reproducible runs."""
        return float(len(self.events) + 1)

    def _log(self, event: str, **detail) -> None:
        self.events.append({"at": self.clock(), "event": event, **detail})

    def _path_text(self, node_id: str) -> str:
        assert self.tree is not None
        return build_path_context_text(self.tree, node_id)

    def _interpret(self, node_id: str, stage: str, summary: Mapping) -> dict:
        """Plan action producing the node's interpretation and next step."""
        action = LlmAction(
            kind="Plan", stage=stage,
            prompt=PromptSections(
                system="You interpret one analysis step and suggest the next.",
                path_context=self._path_text(node_id),
                task=f"Step summary: {json.dumps(summary, sort_keys=True, default=str)}\n"
                     "Give reasons, an evaluation, and the suggested next step.",
                output_schema='{"reasons": "...", "evaluation": "...", "next": "..."}',
            ),
            schema_id="interpretation",
            context={"stage": stage, "node_id": node_id, "summary": summary},
        )
        try:
            return self.gateway.call(action)
        except GatewayError:
            return {"reasons": "interpretation unavailable (gateway exhausted)",
                    "evaluation": "not assessed", "next": "proceed"}

    def _apply_signal(self, node: TreeNode, signal: ControlSignal) -> None:
        node.signal = signal
        node.status = {"Navigate": "Done", "Terminate": "Terminated",
                       "Prune": "Pruned"}[signal.kind]

    def _fail_child(self, parent_id: str, kind: str, action: str, error: str) -> TreeNode:
        assert self.tree is not None
        node = self.tree.add_child(parent_id, kind, action)
        node.status = "Failed"
        node.context.interpretation = {"reasons": f"stage failed: {error}",
                                       "evaluation": "branch abandoned"}
        self._log("stage_failed", node=node.node_id, error=error)
        return node

    # -- goal stage -----------------------------------------------------------

    def start(self, goal: str) -> AgentTree:
        with self.lock:
            self.tree = AgentTree(goal)
            root = self.tree.get(self.tree.root_id)
            self._log("session_start", goal=goal)
            try:
                directions = match_directions(goal, self.taxonomy, self.gateway)
            except GatewayError as exc:
                root.status = "Failed"
                self.advisory = f"goal decomposition failed: {exc}"
                return self.tree
            for d in directions:
                child = self.tree.add_child(
                    self.tree.root_id, "Direction",
                    action=f"direction: {d.insight.name} ({d.temporality})",
                    label=f"{d.insight.name} / {d.temporality}")
                child.context.complete(
                    result={"entity": d.insight.entity, "scope": d.insight.scope,
                            "name": d.insight.name, "temporality": d.temporality,
                            "rank": d.rank, "viz_hints": list(d.insight.viz_hints)},
                    interpretation={"reasons": d.rationale,
                                    "evaluation": f"rank {d.rank} of {len(directions)}"},
                    next_step="author a chain query for this direction")
                self._apply_signal(child, ControlSignal("Navigate", "direction accepted"))
            root.context.complete(
                result={"n_directions": len(directions),
                        "directions": [f"{d.insight.name}/{d.temporality}"
                                       for d in directions]},
                interpretation={"reasons": "goal decomposed against the insight taxonomy",
                                "evaluation": f"{len(directions)} direction(s) matched"},
                next_step="expand each direction" if directions else "refine the goal")
            self._apply_signal(root, ControlSignal("Navigate", "root"))
            if not directions:
                self.advisory = "no insight type matched the goal; please refine it"
            return self.tree

    # -- step dispatch ----------------------------------------------------------

    def step(self, node_id: str) -> list[str]:
        """Expand one node by running the next stage; returns new node ids.
        A failing stage marks only its own child Failed."""
        assert self.tree is not None
        with self.lock:
            node = self.tree.get(node_id)
            if node.status in ("Terminated", "Pruned"):
                raise TerminatedNodeError(f"node {node_id} is {node.status}")
            if node.kind == "Root":
                return [n.node_id for n in self._expand_root()]
            if node.kind == "Direction":
                return [self._step_query(node).node_id]
            if node.kind == "Query":
                return [n.node_id for n in self._step_mine_or_refine(node)]
            if node.kind == "Miner":
                return [self._step_visualize(node).node_id]
            if node.kind == "Visualizer":
                return [self._step_report(node).node_id]
            raise PlannerError(f"node kind {node.kind} cannot be stepped")

    def _expand_root(self) -> list[TreeNode]:
        assert self.tree is not None
        root = self.tree.get(self.tree.root_id)
        if not root.children:
            self.start(self.tree.goal)
        return [self.tree.get(c) for c in root.children]

    # -- query stage ------------------------------------------------------------

    def _direction_of(self, node_id: str) -> TreeNode:
        assert self.tree is not None
        for n in reversed(self.tree.path(node_id)):
            if n.kind == "Direction":
                return n
        raise PlannerError(f"no Direction ancestor for {node_id}")

    def _step_query(self, parent: TreeNode) -> TreeNode:
        assert self.tree is not None
        direction = self._direction_of(parent.node_id)
        d = direction.context.result or {}
        action = LlmAction(
            kind="Invoke", stage="query",
            prompt=PromptSections(
                system="You author chain queries in the engine's DSL.",
                path_context=self._path_text(parent.node_id),
                task=(f"Goal: {self.tree.goal}\nDirection: {d.get('name')} "
                      f"({d.get('temporality')})\nWrite one chain query."),
                output_schema='{"dsl": "...", "rationale": "...", "refine": false}',
            ),
            schema_id="query_chain",
            context={"stage": "query", "node_id": parent.node_id,
                     "direction": [d.get("entity"), d.get("scope"), d.get("name")],
                     "temporality": d.get("temporality"),
                     "entity": d.get("entity"), "goal": self.tree.goal},
        )
        try:
            response = self.gateway.call(action)
            chain = parse_query(response["dsl"])
            initial = None
            if isinstance(chain.source, SourceNode):
                ancestors = {n.node_id for n in self.tree.path(parent.node_id)}
                if chain.source.node_id not in ancestors:
                    raise QueryExecutionError(
                        f"chain source {chain.source.node_id} is not an ancestor")
                initial = self.state.subsets.get(chain.source.node_id)
                if initial is None:
                    raise QueryExecutionError(
                        f"ancestor {chain.source.node_id} holds no subset")
            result = execute_chain(chain, self.snapshot, initial=initial)
        except (GatewayError, AgentSightError) as exc:
            return self._fail_child(parent.node_id, "Query", "query failed", str(exc))

        label = pretty_print(chain)
        node = self.tree.add_child(parent.node_id, "Query",
                                   action=f"query: {label}", label=label)
        self.state.subsets[node.node_id] = result.subset
        self.state.refine_flags[node.node_id] = bool(response.get("refine", False))
        stats = subset_stats(result.subset)
        summary = {"dsl": label, "stats": stats, "steps": result.step_stats}
        interp = self._interpret(node.node_id, "query", summary)
        node.context.complete(result=summary,
                              interpretation={"reasons": interp["reasons"],
                                              "evaluation": interp["evaluation"]},
                              next_step=interp["next"])
        empty = stats["T"] == 0 and stats["X"] == 0 and stats["N"] == 0
        if empty:
            self._apply_signal(node, ControlSignal("Prune", "query produced an empty subset"))
        else:
            self._apply_signal(node, decide_signal(None, "Query",
                                                   self.tree.depth(node.node_id),
                                                   self._thresholds))
        self._log("query", node=node.node_id, dsl=label, stats=stats)
        return node

    # -- mining stage -------------------------------------------------------------

    def _step_mine_or_refine(self, parent: TreeNode) -> list[TreeNode]:
        if self.state.refine_flags.get(parent.node_id):
            self.state.refine_flags[parent.node_id] = False
            return [self._step_query(parent)]
        return self._step_mine(parent)

    def _step_mine(self, parent: TreeNode) -> list[TreeNode]:
        assert self.tree is not None
        direction = self._direction_of(parent.node_id)
        d = direction.context.result or {}
        suggested: list[str] = []
        try:
            from .taxonomy import methods_for
            refs = methods_for(self.taxonomy, (d["entity"], d["scope"], d["name"]),
                               d["temporality"])
            suggested = [r.impl for r in refs if r.impl]
        except AgentSightError:
            suggested = []
        allowed = sorted(registered_method_ids())
        action = LlmAction(
            kind="Invoke", stage="mine",
            prompt=PromptSections(
                system="You pick mining methods matched to the insight type.",
                path_context=self._path_text(parent.node_id),
                task=(f"Direction: {d.get('name')} ({d.get('temporality')})\n"
                      f"Taxonomy suggests: {suggested or 'nothing specific'}\n"
                      f"Registered methods: {allowed}\nPick one method "
                      "(optionally more_methods for parallel miners)."),
                output_schema='{"method_id": "...", "rationale": "...", '
                              '"more_methods": []}',
            ),
            schema_id="method_choice",
            context={"stage": "mine", "node_id": parent.node_id,
                     "allowed_methods": allowed, "suggested_methods": suggested,
                     "direction": [d.get("entity"), d.get("scope"), d.get("name")],
                     "temporality": d.get("temporality")},
        )
        try:
            response = self.gateway.call(action)
        except GatewayError as exc:
            return [self._fail_child(parent.node_id, "Miner", "method choice failed",
                                     str(exc))]
        methods = [response["method_id"]]
        for extra in response.get("more_methods", []):
            if extra not in methods:
                methods.append(extra)
        subset = self.state.subsets.get(parent.node_id)
        if subset is None:
            return [self._fail_child(parent.node_id, "Miner", "mine",
                                     "parent query holds no subset")]
        return [self._mine_one(parent, m, subset) for m in methods]

    def _mine_one(self, parent: TreeNode, method_id: str, subset: Subset) -> TreeNode:
        assert self.tree is not None
        try:
            data = assemble(subset, method_id, self.snapshot)
            grid = self.config.grid_for(method_id)
            u_method = self._u_methods.get(method_id, 0.5)
            entries = grid_search(data, method_id, grid, self._weights, self.gateway,
                                  u_method=u_method,
                                  path_context=self._path_text(parent.node_id))
            best = select_best(entries)
            if best < 0:
                raise AgentSightError(
                    f"all {len(entries)} grid points failed: {entries[0].error}")
        except (GatewayError, AgentSightError) as exc:
            return self._fail_child(parent.node_id, "Miner", f"mine: {method_id}",
                                    str(exc))
        node = self.tree.add_child(parent.node_id, "Miner",
                                   action=f"mine: {method_id}",
                                   label=f"{method_id} ({len(entries)} configs)")
        self.state.miners[node.node_id] = MinerState(
            method_id=method_id, entries=entries, data=data,
            best_index=best, u_method=u_method)
        bs = entries[best].scores
        assert bs is not None
        node.u_contrib = bs.u_m
        summary = {
            "method": method_id, "configs": len(entries),
            "best_params": dict(entries[best].params),
            "best": bs.to_dict(),
            "errors": sum(1 for e in entries if e.error),
        }
        interp = self._interpret(node.node_id, "mine", summary)
        node.context.complete(result=summary,
                              interpretation={"reasons": interp["reasons"],
                                              "evaluation": interp["evaluation"]},
                              next_step=interp["next"])
        self._apply_signal(node, decide_signal(bs.e_m, "Miner",
                                               self.tree.depth(node.node_id),
                                               self._thresholds))
        self._log("mine", node=node.node_id, method=method_id,
                  configs=len(entries), best_e_m=bs.e_m)
        return node

    # -- visualization stage --------------------------------------------------------

    def _step_visualize(self, parent: TreeNode) -> TreeNode:
        assert self.tree is not None
        miner = self.state.miners.get(parent.node_id)
        if miner is None:
            return self._fail_child(parent.node_id, "Visualizer", "visualize",
                                    "miner state missing")
        entry = miner.entries[miner.best_index]
        assert entry.result is not None
        direction = self._direction_of(parent.node_id)
        hints = (direction.context.result or {}).get("viz_hints", [])
        node = self.tree.add_child(parent.node_id, "Visualizer",
                                   action=f"visualize: {miner.method_id}",
                                   label=f"views for {miner.method_id}")
        u_path = accumulate_uncertainty(self.tree, parent.node_id)
        try:
            specs = generate_specs(entry.result, hints, self.snapshot,
                                   viz_id_prefix=f"viz-{node.node_id}",
                                   layout_seed=self.config.layout_seed,
                                   provenance={"node_id": node.node_id,
                                               "method": miner.method_id})
            plan, kept = integrate_or_coordinate(specs)
        except AgentSightError as exc:
            node.status = "Failed"
            node.context.interpretation = {"reasons": f"stage failed: {exc}",
                                           "evaluation": "branch abandoned"}
            self._log("stage_failed", node=node.node_id, error=str(exc))
            return node
        evals = []
        for spec in kept:
            ev = evaluate_view(spec, u_path, self.gateway, self._viz_weights,
                               path_context=self._path_text(node.node_id))
            self.state.specs[spec.viz_id] = spec
            self.state.viz_evals[spec.viz_id] = ev
            self.state.spec_nodes[spec.viz_id] = node.node_id
            evals.append(ev)
        self.state.layouts[node.node_id] = plan
        summary = {
            "views": [{"viz_id": s.viz_id, "type": s.viz_type,
                       "e_v": evals[i].e_v} for i, s in enumerate(kept)],
            "u_path": u_path,
            "integrated": plan.integrated,
        }
        interp = self._interpret(node.node_id, "vis", summary)
        node.context.complete(result=summary,
                              interpretation={"reasons": interp["reasons"],
                                              "evaluation": interp["evaluation"]},
                              next_step=interp["next"])
        best_ev = max((e.e_v for e in evals), default=0.0)
        self._apply_signal(node, decide_signal(best_ev, "Visualizer",
                                               self.tree.depth(node.node_id),
                                               self._thresholds))
        self._log("visualize", node=node.node_id, views=len(kept), best_e_v=best_ev)
        return node

    # -- report stage -----------------------------------------------------------------

    def selected_views(self) -> list[tuple[VizSpec, VizEval]]:
        thr = self.config.thresholds.view_selection
        out = []
        for viz_id in sorted(self.state.specs):
            ev = self.state.viz_evals[viz_id]
            if ev.e_v >= thr:
                out.append((self.state.specs[viz_id], ev))
        return out

    def _step_report(self, parent: TreeNode) -> TreeNode:
        assert self.tree is not None
        node = self.tree.add_child(parent.node_id, "Report", action="compose report",
                                   label="insight report")
        views = self.selected_views()
        try:
            report = compose_report(
                views, self.tree.goal, self.gateway,
                selection_threshold=self.config.thresholds.view_selection,
                source_nodes=self.state.spec_nodes,
                path_context=self._path_text(parent.node_id))
            if report.items:
                report.evals = evaluate_report(report.items, self.tree.goal,
                                               self.gateway, self._report_weights,
                                               path_context=self._path_text(node.node_id))
        except GatewayError as exc:
            node.status = "Failed"
            node.context.interpretation = {"reasons": f"stage failed: {exc}",
                                           "evaluation": "report unavailable"}
            return node
        self.report = report
        self.report_node = node.node_id
        self._build_link_graph()
        summary = {"items": len(report.items),
                   "e_r": [e.e_r for e in report.evals],
                   "advisory": report.advisory}
        interp = self._interpret(node.node_id, "report", summary)
        node.context.complete(result=summary,
                              interpretation={"reasons": interp["reasons"],
                                              "evaluation": interp["evaluation"]},
                              next_step=interp["next"])
        self._apply_signal(node, decide_signal(None, "Report",
                                               self.tree.depth(node.node_id),
                                               self._thresholds))
        self._log("report", node=node.node_id, items=len(report.items))
        return node

    def _build_link_graph(self) -> None:
        assert self.tree is not None
        query_subsets = [self.state.subsets[nid] for nid in sorted(self.state.subsets)]
        results: list[MiningResult] = []
        for nid in sorted(self.state.miners):
            ms = self.state.miners[nid]
            entry = ms.entries[ms.best_index]
            if entry.result is not None:
                results.append(entry.result)
        items, graph = atomize(query_subsets, results, self.snapshot)
        for viz_id in sorted(self.state.specs):
            bind_elements(graph, viz_id, self.state.specs[viz_id].element_map())
        self.data_items = items
        self.link_graph = graph
        plan, _ = integrate_or_coordinate([self.state.specs[v]
                                           for v in sorted(self.state.specs)])
        self.report_plan = plan

    # -- drivers ------------------------------------------------------------------

    def run_to_completion(self) -> AgentTree:
        """Advance every navigable branch through all four stages, then
        compose one report from the best visualizer branch."""
        assert self.tree is not None
        with self.lock:
            tree = self.tree
            for did in list(tree.get(tree.root_id).children):
                dnode = tree.get(did)
                if dnode.status == "Done" and dnode.kind == "Direction":
                    self.step(did)
            # query chains: refine at most twice, then mine
            frontier = [nid for nid, n in sorted(tree.nodes.items())
                        if n.kind == "Query" and n.status == "Done"]
            hops = 0
            while frontier and hops < 3:
                next_frontier = []
                for qid in frontier:
                    if tree.get(qid).children:
                        continue
                    new_ids = self.step(qid)
                    for nid in new_ids:
                        n = tree.get(nid)
                        if n.kind == "Query" and n.status == "Done":
                            next_frontier.append(nid)
                frontier = next_frontier
                hops += 1
            for mid in [nid for nid, n in sorted(tree.nodes.items())
                        if n.kind == "Miner" and n.status == "Done"]:
                if not tree.get(mid).children:
                    self.step(mid)
            vis_nodes = [(nid, n) for nid, n in sorted(tree.nodes.items())
                         if n.kind == "Visualizer" and n.status == "Done"]
            if vis_nodes:
                def best_ev(item):
                    nid, n = item
                    views = (n.context.result or {}).get("views", [])
                    return (-max((v["e_v"] for v in views), default=0.0), nid)
                target = min(vis_nodes, key=best_ev)[0]
                if not tree.get(target).children:
                    self.step(target)
            elif self.report is None and self.advisory is None:
                self.advisory = "no branch produced an effective visualization"
            return tree

    # -- user actions ----------------------------------------------------------------

    def refine_goal(self, text: str) -> list[str]:
        assert self.tree is not None
        with self.lock:
            root = self.tree.get(self.tree.root_id)
            if root.status in ("Terminated",):
                raise TerminatedNodeError("session root is terminated")
            before = set(root.children)
            directions = match_directions(text, self.taxonomy, self.gateway)
            for d in directions:
                child = self.tree.add_child(
                    self.tree.root_id, "Direction",
                    action=f"direction: {d.insight.name} ({d.temporality})",
                    label=f"{d.insight.name} / {d.temporality}")
                child.context.complete(
                    result={"entity": d.insight.entity, "scope": d.insight.scope,
                            "name": d.insight.name, "temporality": d.temporality,
                            "rank": d.rank, "viz_hints": list(d.insight.viz_hints),
                            "refined_from": text},
                    interpretation={"reasons": d.rationale,
                                    "evaluation": f"refinement rank {d.rank}"},
                    next_step="author a chain query for this direction")
                self._apply_signal(child, ControlSignal("Navigate", "refined direction"))
            self._log("refine_goal", text=text, new=len(directions))
            return [c for c in self.tree.get(self.tree.root_id).children
                    if c not in before]

    def add_mining_config(self, miner_id: str, params: Mapping[str, Any]) -> MinerState:
        """Append a grid point, re-normalize grid-relative metrics, re-rank,
        and regenerate the downstream visualizer if the winner changed."""
        assert self.tree is not None
        with self.lock:
            node = self.tree.get(miner_id)
            if node.kind != "Miner":
                raise PlannerError(f"{miner_id} is not a Miner node")
            if node.status in ("Terminated", "Pruned"):
                raise TerminatedNodeError(f"node {miner_id} is {node.status}")
            ms = self.state.miners[miner_id]
            old_best = ms.best_index
            extended = grid_search(ms.data, ms.method_id,
                                   [e.params for e in ms.entries] + [dict(params)],
                                   self._weights, self.gateway, u_method=ms.u_method,
                                   path_context=self._path_text(miner_id))
            ms.entries = extended
            ms.best_index = select_best(extended)
            bs = extended[ms.best_index].scores
            assert bs is not None
            node.u_contrib = bs.u_m
            result = dict(node.context.result or {})
            result.update({"configs": len(extended),
                           "best_params": dict(extended[ms.best_index].params),
                           "best": bs.to_dict()})
            node.context.result = result
            self._log("add_config", node=miner_id, configs=len(extended))
            if ms.best_index != old_best:
                for child in list(node.children):
                    removed = self.tree.remove_subtree(child)
                    for viz_id in [v for v, n in list(self.state.spec_nodes.items())
                                   if n in removed]:
                        self.state.specs.pop(viz_id, None)
                        self.state.viz_evals.pop(viz_id, None)
                        self.state.spec_nodes.pop(viz_id, None)
                    for rid in removed:
                        self.state.layouts.pop(rid, None)
                self.step(miner_id)
            return ms

    def validate_node(self, node_id: str, verdict: str) -> None:
        assert self.tree is not None
        with self.lock:
            node = self.tree.get(node_id)
            if node.status == "Terminated":
                raise TerminatedNodeError(f"node {node_id} is terminated")
            interp = dict(node.context.interpretation or {})
            interp["user_verdict"] = verdict
            node.context.interpretation = interp
            self._log("validate", node=node_id, verdict=verdict)

    # -- read models -------------------------------------------------------------------

    def miner_badges(self) -> dict[str, dict]:
        out = {}
        for nid, ms in self.state.miners.items():
            bs = ms.entries[ms.best_index].scores
            out[nid] = {"configs": len(ms.entries),
                        "best_e_m": bs.e_m if bs else None,
                        "method": ms.method_id}
        return out

    def display_tree(self):
        assert self.tree is not None
        return aggregate_for_display(self.tree, self.miner_badges())

    def miner_rows(self, miner_id: str) -> list[dict]:
        """Parallel-coordinates rows: one per configuration."""
        ms = self.state.miners.get(miner_id)
        if ms is None:
            raise PlannerError(f"{miner_id} has no mining state")
        rows = []
        for i, e in enumerate(ms.entries):
            row: dict[str, Any] = {"config": i, "selected": i == ms.best_index,
                                   **{f"param_{k}": v for k, v in sorted(e.params.items())}}
            if e.scores is not None:
                row.update(e.scores.to_dict())
            row["error"] = e.error
            rows.append(row)
        return rows

    def trace(self, element: str, target_kind: str) -> list[str]:
        if self.link_graph is None:
            raise PlannerError("link graph not built yet (no report stage)")
        return trace(self.link_graph, element, target_kind)

    def trace_window(self, start: float, end: float, target_kind: str) -> list[str]:
        """Brushed time window -> linked nodes (via the documented paths)."""
        if self.link_graph is None:
            raise PlannerError("link graph not built yet (no report stage)")
        out: set[str] = set()
        for node_id, node in self.link_graph.nodes.items():
            if node.kind != "time_point":
                continue
            idx = int(node_id.rsplit(":", 1)[1])
            item = next((i for i in self.data_items
                         if i.item_id == node_id), None)
            if item is None:
                continue
            if item.fields["start"] < end and item.fields["end"] > start:
                if target_kind == "word":
                    out.update(trace_via(self.link_graph, node_id, "post", "word"))
                else:
                    out.update(trace(self.link_graph, node_id, target_kind))
        return sorted(out)

    def state_dict(self) -> dict:
        assert self.tree is not None
        return {
            "session_id": self.session_id,
            "snapshot_id": self.snapshot.snapshot_id,
            "tree": self.tree.to_dict(),
            "advisory": self.advisory,
            "report": self.report.to_dict() if self.report else None,
            "report_node": self.report_node,
            "specs": {vid: self.state.specs[vid].to_dict()
                      for vid in sorted(self.state.specs)},
            "viz_evals": {vid: self.state.viz_evals[vid].to_dict()
                          for vid in sorted(self.state.viz_evals)},
            "spec_nodes": dict(sorted(self.state.spec_nodes.items())),
            "plan": self.report_plan.to_dict() if self.report_plan else None,
            "events": len(self.events),
        }

    def serialize(self) -> str:
        return json.dumps(self.state_dict(), sort_keys=True, separators=(",", ":"))
