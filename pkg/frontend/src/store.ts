import type { DisplayNode, MinerDetail, RawNode, Report, VizSpec } from "./types.js";

export interface ChatMessage {
  role: "user" | "planner";
  text: string;
}

export interface ViewState {
  sessionId: string | null;
  status: string;
  chat: ChatMessage[];
  tree: DisplayNode | null;
  expanded: Record<string, RawNode[]>;
  selectedMiner: string | null;
  minerDetail: MinerDetail | null;
  flipped: boolean;
  report: Report | null;
  specs: Record<string, VizSpec>;
  hoveredInsight: string | null;
  highlightedTreeNodes: string[];
  // highlight sets are engine trace() responses, applied verbatim
  highlightedElements: string[];
  brush: { start: number; end: number } | null;
  error: string | null;
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    status: "idle",
    chat: [],
    tree: null,
    expanded: {},
    selectedMiner: null,
    minerDetail: null,
    flipped: false,
    report: null,
    specs: {},
    hoveredInsight: null,
    highlightedTreeNodes: [],
    highlightedElements: [],
    brush: null,
    error: null,
  };
}

type Listener = (state: ViewState) => void;

/** Single unidirectional store: every change flows through update(). */
export class Store {
  private state: ViewState = initialState();
  private listeners: Listener[] = [];

  get(): ViewState {
    return this.state;
  }

  update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }
}

export function countDisplayNodes(node: DisplayNode): number {
  return 1 + node.children.reduce((acc, c) => acc + countDisplayNodes(c), 0);
}
