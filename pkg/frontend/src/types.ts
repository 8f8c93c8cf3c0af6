// Payload shapes of the engine's /api/v1 endpoints (docs/api.md).

export interface ControlSignal {
  kind: "Navigate" | "Terminate" | "Prune";
  reason: string;
}

export interface DisplayNode {
  display_id: string;
  kind: "Root" | "Direction" | "Query" | "Miner" | "Visualizer" | "Report";
  label: string;
  raw_node_ids: string[];
  collapsed: boolean;
  status: string;
  signal: ControlSignal | null;
  badge: Record<string, unknown>;
  children: DisplayNode[];
}

export const NODE_KINDS = [
  "Root", "Direction", "Query", "Miner", "Visualizer", "Report",
] as const;

export interface RawNode {
  node_id: string;
  kind: string;
  status: string;
  label: string;
  context: {
    action: string;
    result: Record<string, unknown> | null;
    interpretation: Record<string, unknown> | null;
    next: string | null;
    pending: boolean;
  };
}

export interface MinerRow {
  config: number;
  selected: boolean;
  error: string | null;
  [dim: string]: unknown;
}

export interface MinerDetail {
  node_id: string;
  method: string;
  rows: MinerRow[];
}

export interface InsightItem {
  insight_id: string;
  five_w: Record<string, string | null>;
  narrative: string;
  view_refs: string[];
  source_node: string;
}

export interface Report {
  items: InsightItem[];
  evals: { s_rel: number; s_comp: number; e_r: number }[];
  advisory: string | null;
  plan: { views: string[]; integrated: unknown[]; links: unknown[] } | null;
}

export interface DataItem {
  item_id: string;
  kind: string;
  fields: Record<string, string | number | boolean>;
  entity_refs: string[];
}

export interface VizSpec {
  viz_id: string;
  viz_type: "WordCloud" | "LineChart" | "BarChart" | "ForceGraph" | "ParallelCoordinates";
  title: string;
  encodings: Record<string, string>;
  params: Record<string, unknown>;
  data_items: DataItem[];
  eval?: { e_v: number } | null;
  source_node?: string | null;
}

export interface SessionCreated {
  session_id: string;
  status: string;
  advisory: string | null;
  tree: DisplayNode;
}

export interface TraceResult {
  nodes: string[];
}
