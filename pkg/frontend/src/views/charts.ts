import type { VizSpec } from "../types.js";

export interface ChartHandlers {
  onWordHover: (itemId: string | null) => void;
  onBrush: (start: number, end: number) => void;
  onBrushClear: () => void;
}

const PALETTE = ["#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2",
                 "#b279a2", "#ff9da6", "#9d755d"];

const SVG_NS = "http://www.w3.org/2000/svg";

function numberField(item: { fields: Record<string, unknown> }, name: string): number {
  const v = item.fields[name];
  return typeof v === "number" ? v : 0;
}

function renderWordCloud(host: HTMLElement, spec: VizSpec): void {
  const sizeField = spec.encodings["size"] ?? "weight";
  const weights = spec.data_items.map((i) => numberField(i, sizeField));
  const max = Math.max(...weights, 1e-9);
  for (const item of spec.data_items) {
    const span = document.createElement("span");
    span.className = "cloud-word";
    span.dataset.itemId = item.item_id;
    span.textContent = String(item.fields[spec.encodings["label"] ?? "text"] ?? "");
    const rel = numberField(item, sizeField) / max;
    span.style.fontSize = `${(10 + 22 * rel).toFixed(1)}px`;
    const group = item.fields[spec.encodings["group"] ?? "topic"];
    if (typeof group === "number") {
      span.style.color = PALETTE[group % PALETTE.length];
    }
    host.appendChild(span);
  }
}

function renderLineChart(host: HTMLElement, spec: VizSpec,
                         handlers: ChartHandlers): void {
  const width = 560;
  const height = 180;
  const pad = 24;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.classList.add("line-chart");
  const xs = spec.data_items.map((i) => numberField(i, spec.encodings["x"] ?? "start"));
  const ys = spec.data_items.map((i) => numberField(i, spec.encodings["y"] ?? "value"));
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMax = Math.max(...ys, 1e-9);
  const px = (x: number) =>
    pad + (xMax === xMin ? 0 : ((x - xMin) / (xMax - xMin)) * (width - 2 * pad));
  const py = (y: number) => height - pad - (y / yMax) * (height - 2 * pad);

  const change = Array.isArray(spec.params["change_points"])
    ? (spec.params["change_points"] as number[]) : [];
  for (const cp of change) {
    if (cp < xs.length) {
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(px(xs[cp])));
      line.setAttribute("x2", String(px(xs[cp])));
      line.setAttribute("y1", String(pad));
      line.setAttribute("y2", String(height - pad));
      line.setAttribute("class", "change-point");
      svg.appendChild(line);
    }
  }

  const poly = document.createElementNS(SVG_NS, "polyline");
  poly.setAttribute("points",
    xs.map((x, i) => `${px(x)},${py(ys[i])}`).join(" "));
  poly.setAttribute("fill", "none");
  poly.setAttribute("class", "line-path");
  svg.appendChild(poly);

  spec.data_items.forEach((item, i) => {
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(px(xs[i])));
    dot.setAttribute("cy", String(py(ys[i])));
    dot.setAttribute("r", "3");
    dot.setAttribute("class", "time-point");
    dot.setAttribute("data-item-id", item.item_id);
    svg.appendChild(dot);
  });

  // drag to brush a time window (screen x back to epoch seconds)
  let anchor: number | null = null;
  const toEpoch = (clientX: number, rect: DOMRect) => {
    const frac = Math.min(1, Math.max(0, (clientX - rect.left - pad)
      / Math.max(rect.width - 2 * pad, 1)));
    return xMin + frac * (xMax - xMin);
  };
  svg.addEventListener("mousedown", (ev) => {
    anchor = toEpoch(ev.clientX, svg.getBoundingClientRect());
  });
  svg.addEventListener("mouseup", (ev) => {
    if (anchor === null) return;
    const end = toEpoch(ev.clientX, svg.getBoundingClientRect());
    const [a, b] = anchor <= end ? [anchor, end] : [end, anchor];
    anchor = null;
    if (b - a < 1) {
      handlers.onBrushClear();
    } else {
      handlers.onBrush(a, b);
    }
  });
  host.appendChild(svg);
}

function renderBarChart(host: HTMLElement, spec: VizSpec): void {
  const heightField = spec.encodings["height"];
  const labelField = spec.encodings["label"] ?? "name";
  const values = spec.data_items.map((i) => numberField(i, heightField));
  const max = Math.max(...values, 1e-9);
  const wrap = document.createElement("div");
  wrap.className = "bar-chart";
  spec.data_items.forEach((item, i) => {
    const row = document.createElement("div");
    row.className = "bar-row";
    row.dataset.itemId = item.item_id;
    const label = document.createElement("span");
    label.className = "bar-label";
    label.textContent = String(item.fields[labelField] ?? "");
    const bar = document.createElement("span");
    bar.className = "bar-fill";
    bar.style.width = `${((values[i] / max) * 100).toFixed(1)}%`;
    bar.title = String(values[i]);
    row.appendChild(label);
    row.appendChild(bar);
    wrap.appendChild(row);
  });
  host.appendChild(wrap);
}

function renderForceGraph(host: HTMLElement, spec: VizSpec): void {
  const size = 360;
  const pad = 16;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${size} ${size}`);
  svg.classList.add("force-graph");
  const sx = (v: number) => pad + v * (size - 2 * pad);
  const index = new Map(spec.data_items.map((item, i) => [i, item]));
  const edges = Array.isArray(spec.params["edges"])
    ? (spec.params["edges"] as [number, number, number][]) : [];
  for (const [s, d] of edges) {
    const a = index.get(s);
    const b = index.get(d);
    if (!a || !b) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(sx(numberField(a, "x"))));
    line.setAttribute("y1", String(sx(numberField(a, "y"))));
    line.setAttribute("x2", String(sx(numberField(b, "x"))));
    line.setAttribute("y2", String(sx(numberField(b, "y"))));
    line.setAttribute("class", "graph-edge");
    svg.appendChild(line);
  }
  const sizeField = spec.encodings["size"];
  const sizes = sizeField
    ? spec.data_items.map((i) => numberField(i, sizeField)) : [];
  const sizeMax = Math.max(...sizes, 1e-9);
  spec.data_items.forEach((item) => {
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(sx(numberField(item, "x"))));
    dot.setAttribute("cy", String(sx(numberField(item, "y"))));
    const r = sizeField ? 2 + 8 * (numberField(item, sizeField) / sizeMax) : 4;
    dot.setAttribute("r", r.toFixed(2));
    const community = item.fields[spec.encodings["color"] ?? "community"];
    if (typeof community === "number") {
      dot.setAttribute("fill", PALETTE[community % PALETTE.length]);
    }
    dot.setAttribute("data-item-id", item.item_id);
    dot.setAttribute("class", "graph-node");
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = String(item.fields[spec.encodings["label"] ?? "name"] ?? "");
    dot.appendChild(title);
    svg.appendChild(dot);
  });
  host.appendChild(svg);
}

/** Pure renderer: layout coordinates, sizes, and orders all come from the
 * engine's spec document. */
export function renderSpec(container: HTMLElement, spec: VizSpec,
                           handlers: ChartHandlers): HTMLElement {
  const panel = document.createElement("section");
  panel.className = `viz viz-${spec.viz_type.toLowerCase()}`;
  panel.dataset.vizId = spec.viz_id;
  const caption = document.createElement("h4");
  caption.textContent = spec.title || spec.viz_id;
  panel.appendChild(caption);
  if (spec.viz_type === "WordCloud") renderWordCloud(panel, spec);
  else if (spec.viz_type === "LineChart") renderLineChart(panel, spec, handlers);
  else if (spec.viz_type === "BarChart") renderBarChart(panel, spec);
  else if (spec.viz_type === "ForceGraph") renderForceGraph(panel, spec);
  panel.addEventListener("mouseover", (ev) => {
    const target = (ev.target as HTMLElement).closest?.("[data-item-id]");
    if (target instanceof HTMLElement || target instanceof SVGElement) {
      const id = target.getAttribute("data-item-id") ?? "";
      if (id.startsWith("item:word:")) handlers.onWordHover(id);
    }
  });
  panel.addEventListener("mouseleave", () => handlers.onWordHover(null));
  container.appendChild(panel);
  return panel;
}

/** Apply an engine trace() response verbatim: highlight exactly these ids. */
export function highlightElements(container: HTMLElement, ids: string[]): void {
  const wanted = new Set(ids);
  container.querySelectorAll<HTMLElement>("[data-item-id]").forEach((el) => {
    el.classList.toggle("highlighted",
      wanted.has(el.getAttribute("data-item-id") ?? ""));
  });
}

export function highlightedElementIds(container: HTMLElement): string[] {
  return [...container.querySelectorAll("[data-item-id].highlighted")]
    .map((el) => el.getAttribute("data-item-id") ?? "")
    .sort();
}
