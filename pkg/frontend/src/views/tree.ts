import type { DisplayNode, RawNode } from "../types.js";
import { NODE_KINDS } from "../types.js";

export interface TreeHandlers {
  onExpand: (displayId: string) => void;
  onMinerClick: (nodeId: string) => void;
  onNodeHover: (sourceNodes: string[] | null) => void;
}

const SIGNAL_ICON: Record<string, string> = {
  Navigate: "→",   // arrow
  Terminate: "✕",  // cross
  Prune: "✂",      // scissors
};

function renderNode(node: DisplayNode, handlers: TreeHandlers): HTMLElement {
  const li = document.createElement("li");
  const card = document.createElement("div");
  card.className = `tree-node kind-${node.kind.toLowerCase()} status-${node.status.toLowerCase()}`;
  if (node.collapsed) card.classList.add("collapsed");
  card.dataset.displayId = node.display_id;
  card.dataset.kind = node.kind;
  card.dataset.rawIds = node.raw_node_ids.join(",");

  const icon = document.createElement("span");
  icon.className = "node-icon";
  card.appendChild(icon);

  const label = document.createElement("span");
  label.className = "node-label";
  label.textContent = node.label;
  card.appendChild(label);

  if (node.kind === "Miner" && typeof node.badge["configs"] === "number") {
    const badge = document.createElement("span");
    badge.className = "node-badge";
    badge.textContent = `${node.badge["configs"]}`;
    badge.title = `${node.badge["configs"]} configurations (best shown)`;
    card.appendChild(badge);
  }
  if (typeof node.badge["merged_queries"] === "number") {
    const badge = document.createElement("span");
    badge.className = "node-badge merged";
    badge.textContent = `${node.badge["merged_queries"]} steps`;
    card.appendChild(badge);
  }
  if (node.signal) {
    const sig = document.createElement("span");
    sig.className = `node-signal signal-${node.signal.kind.toLowerCase()}`;
    sig.textContent = SIGNAL_ICON[node.signal.kind] ?? "?";
    sig.title = node.signal.reason;
    card.appendChild(sig);
  }
  if (node.collapsed || node.raw_node_ids.length > 1) {
    const btn = document.createElement("button");
    btn.className = "expand-btn";
    btn.textContent = "+";
    btn.title = "show hidden raw nodes";
    btn.addEventListener("click", (ev) => {
      ev.stopPropagation();
      handlers.onExpand(node.display_id);
    });
    card.appendChild(btn);
  }
  if (node.kind === "Miner") {
    card.addEventListener("click", () => handlers.onMinerClick(node.raw_node_ids[0]));
  }
  card.addEventListener("mouseenter", () => handlers.onNodeHover(node.raw_node_ids));
  card.addEventListener("mouseleave", () => handlers.onNodeHover(null));

  li.appendChild(card);
  if (node.children.length > 0) {
    const ul = document.createElement("ul");
    ul.className = "tree-children";
    for (const child of node.children) {
      ul.appendChild(renderNode(child, handlers));
    }
    li.appendChild(ul);
  }
  return li;
}

export function renderTree(container: HTMLElement, tree: DisplayNode | null,
                           handlers: TreeHandlers): void {
  container.innerHTML = "";
  if (tree === null) {
    container.textContent = "no session yet";
    return;
  }
  const legend = document.createElement("div");
  legend.className = "tree-legend";
  for (const kind of NODE_KINDS) {
    const entry = document.createElement("span");
    entry.className = `legend-entry kind-${kind.toLowerCase()}`;
    entry.dataset.kind = kind;
    entry.textContent = kind;
    legend.appendChild(entry);
  }
  container.appendChild(legend);
  const root = document.createElement("ul");
  root.className = "tree-root";
  root.appendChild(renderNode(tree, handlers));
  container.appendChild(root);
}

export function renderExpansion(container: HTMLElement, displayId: string,
                                nodes: RawNode[]): void {
  const host = container.querySelector<HTMLElement>(
    `[data-display-id="${displayId}"]`);
  if (!host) return;
  let panel = host.querySelector<HTMLElement>(".raw-nodes");
  if (!panel) {
    panel = document.createElement("div");
    panel.className = "raw-nodes";
    host.appendChild(panel);
  }
  panel.innerHTML = "";
  for (const raw of nodes) {
    const row = document.createElement("div");
    row.className = "raw-node";
    row.dataset.nodeId = raw.node_id;
    row.textContent = `${raw.node_id} [${raw.kind}/${raw.status}] ${raw.label}`;
    panel.appendChild(row);
  }
}

/** Outline exactly the tree cards whose raw ids intersect `nodeIds`. */
export function highlightTreeNodes(container: HTMLElement, nodeIds: string[]): void {
  const wanted = new Set(nodeIds);
  container.querySelectorAll<HTMLElement>(".tree-node").forEach((el) => {
    const raw = (el.dataset.rawIds ?? "").split(",");
    el.classList.toggle("highlighted", raw.some((r) => wanted.has(r)));
  });
}

export function renderedNodeCount(container: HTMLElement): number {
  return container.querySelectorAll(".tree-node").length;
}
