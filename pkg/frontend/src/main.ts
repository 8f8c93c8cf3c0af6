import { ApiClient, ApiError } from "./api.js";
import { Store } from "./store.js";
import { renderChat } from "./views/chat.js";
import { highlightElements, renderSpec } from "./views/charts.js";
import { renderMiningCard } from "./views/mining.js";
import { highlightItemsForNodes, renderReport } from "./views/report.js";
import { highlightTreeNodes, renderExpansion, renderTree } from "./views/tree.js";
import type { VizSpec } from "./types.js";

export interface AppElements {
  chat: HTMLElement;
  tree: HTMLElement;
  mining: HTMLElement;
  report: HTMLElement;
  charts: HTMLElement;
}

export interface AppOptions {
  pollIntervalMs?: number;
}

/** Wire the four coordinated views to the store and the engine API. All
 * cross-view highlight sets come from the engine's trace endpoints; stage
 * progress is polled, never pushed. */
export class App {
  readonly store = new Store();
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private pollIntervalMs: number;

  constructor(private api: ApiClient, private el: AppElements,
              options: AppOptions = {}) {
    this.pollIntervalMs = options.pollIntervalMs ?? 1500;
    this.store.subscribe(() => this.render());
    this.render();
  }

  private startPolling(): void {
    if (this.pollTimer !== null) return;
    this.pollTimer = setInterval(() => void this.pollOnce(), this.pollIntervalMs);
  }

  stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  /** One progress poll: refresh the tree; stop once the report exists. */
  async pollOnce(): Promise<void> {
    const sid = this.store.get().sessionId;
    if (!sid) return;
    const tree = await this.api.getTree(sid);
    this.store.update({ tree });
    await this.refreshReport();
    if (this.store.get().report !== null) {
      this.store.update({ status: "complete" });
      this.stopPolling();
    }
  }

  async submitGoal(text: string): Promise<void> {
    const state = this.store.get();
    this.store.update({ chat: [...state.chat, { role: "user", text }] });
    try {
      if (state.sessionId === null) {
        const created = await this.api.createSession(text);
        this.store.update({
          sessionId: created.session_id,
          status: created.status,
          tree: created.tree,
          chat: [...this.store.get().chat, {
            role: "planner",
            text: created.advisory ?? `session ${created.session_id}: ${created.status}`,
          }],
        });
        await this.refreshReport();
        if (this.store.get().report === null && created.status === "open") {
          this.startPolling();
        }
      } else {
        await this.api.refine(state.sessionId, text);
        const tree = await this.api.getTree(state.sessionId);
        this.store.update({
          tree,
          chat: [...this.store.get().chat,
                 { role: "planner", text: "added refinement directions" }],
        });
        await this.refreshReport();
      }
    } catch (err) {
      const message = err instanceof ApiError ? err.message : String(err);
      this.store.update({
        error: message,
        chat: [...this.store.get().chat, { role: "planner", text: `error: ${message}` }],
      });
    }
  }

  async refreshReport(): Promise<void> {
    const sid = this.store.get().sessionId;
    if (!sid) return;
    try {
      const report = await this.api.getReport(sid);
      const specs: Record<string, VizSpec> = {};
      const wanted = new Set<string>();
      for (const item of report.items) {
        for (const ref of item.view_refs) wanted.add(ref);
      }
      for (const viz of report.plan?.views ?? []) wanted.add(viz);
      for (const vizId of [...wanted].sort()) {
        specs[vizId] = await this.api.getViz(sid, vizId);
      }
      this.store.update({ report, specs });
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) return;  // not composed yet
      throw err;
    }
  }

  async expand(displayId: string): Promise<void> {
    const sid = this.store.get().sessionId;
    if (!sid) return;
    const result = await this.api.expandNode(sid, displayId);
    this.store.update({
      expanded: { ...this.store.get().expanded, [displayId]: result.nodes },
    });
  }

  async selectMiner(nodeId: string): Promise<void> {
    const sid = this.store.get().sessionId;
    if (!sid) return;
    const detail = await this.api.minerDetail(sid, nodeId);
    this.store.update({ selectedMiner: nodeId, minerDetail: detail, flipped: true });
  }

  async addConfig(params: Record<string, unknown>): Promise<void> {
    const { sessionId, selectedMiner } = this.store.get();
    if (!sessionId || !selectedMiner) return;
    const detail = await this.api.addConfig(sessionId, selectedMiner, params);
    const tree = await this.api.getTree(sessionId);
    this.store.update({ minerDetail: detail, tree });
    await this.refreshReport();
  }

  async hoverWord(itemId: string | null): Promise<void> {
    const sid = this.store.get().sessionId;
    if (!sid) return;
    if (itemId === null) {
      this.store.update({ highlightedElements: [] });
      return;
    }
    const traced = await this.api.trace(sid, itemId, "time_point");
    this.store.update({ highlightedElements: traced.nodes });
  }

  async brush(start: number, end: number): Promise<void> {
    const sid = this.store.get().sessionId;
    if (!sid) return;
    const traced = await this.api.traceWindow(sid, start, end, "word");
    this.store.update({ brush: { start, end }, highlightedElements: traced.nodes });
  }

  clearBrush(): void {
    this.store.update({ brush: null, highlightedElements: [] });
  }

  hoverInsight(insightId: string | null, sourceNode: string | null): void {
    this.store.update({
      hoveredInsight: insightId,
      highlightedTreeNodes: sourceNode ? [sourceNode] : [],
    });
  }

  hoverTreeNode(rawIds: string[] | null): void {
    highlightItemsForNodes(this.el.report, rawIds ?? []);
  }

  render(): void {
    const state = this.store.get();
    renderChat(this.el.chat, state.chat, { onSubmit: (t) => void this.submitGoal(t) });
    renderTree(this.el.tree, state.tree, {
      onExpand: (id) => void this.expand(id),
      onMinerClick: (id) => void this.selectMiner(id),
      onNodeHover: (ids) => this.hoverTreeNode(ids),
    });
    for (const [displayId, nodes] of Object.entries(state.expanded)) {
      renderExpansion(this.el.tree, displayId, nodes);
    }
    highlightTreeNodes(this.el.tree, state.highlightedTreeNodes);
    renderMiningCard(this.el.mining, state.minerDetail, state.flipped, {
      onAddConfig: (params) => void this.addConfig(params),
    });
    renderReport(this.el.report, state.report, {
      onItemHover: (id, node) => this.hoverInsight(id, node),
    });
    this.el.charts.innerHTML = "";
    for (const vizId of Object.keys(state.specs).sort()) {
      renderSpec(this.el.charts, state.specs[vizId], {
        onWordHover: (id) => void this.hoverWord(id),
        onBrush: (a, b) => void this.brush(a, b),
        onBrushClear: () => this.clearBrush(),
      });
    }
    highlightElements(this.el.charts, state.highlightedElements);
  }
}

export function mount(root: Document = document,
                      api: ApiClient = new ApiClient(),
                      options: AppOptions = {}): App {
  const el: AppElements = {
    chat: root.getElementById("chat-panel")!,
    tree: root.getElementById("agent-tree")!,
    mining: root.getElementById("mining-view")!,
    report: root.getElementById("report-view")!,
    charts: root.getElementById("charts")!,
  };
  return new App(api, el, options);
}

declare global {
  interface Window { agentsight?: App }
}

if (typeof window !== "undefined" && typeof document !== "undefined"
    && document.getElementById("chat-panel")) {
  window.agentsight = mount();
}
