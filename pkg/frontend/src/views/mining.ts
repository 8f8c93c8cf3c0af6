import type { MinerDetail, MinerRow } from "../types.js";

export interface MiningHandlers {
  onAddConfig: (params: Record<string, unknown>) => void;
}

const QUALITY_DIMS = ["s_stab", "s_metric", "s_llm", "e_m", "u_m"];

function numericDims(rows: MinerRow[]): string[] {
  const params = new Set<string>();
  for (const row of rows) {
    for (const key of Object.keys(row)) {
      if (key.startsWith("param_") && typeof row[key] === "number") {
        params.add(key);
      }
    }
  }
  const quality = QUALITY_DIMS.filter((d) => rows.some(
    (r) => typeof r[d] === "number"));
  return [...[...params].sort(), ...quality];
}

/** Parallel coordinates: one polyline per mining attempt. Constant axes
 * render as a degenerate (midpoint) but visible dimension. */
export function renderParallelCoordinates(svg: SVGSVGElement, rows: MinerRow[]): void {
  const width = 640;
  const height = 240;
  const pad = 28;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.innerHTML = "";
  const dims = numericDims(rows);
  if (dims.length === 0 || rows.length === 0) return;
  const xFor = (i: number) =>
    pad + (dims.length === 1 ? 0 : (i * (width - 2 * pad)) / (dims.length - 1));

  const ranges = dims.map((d) => {
    const vals = rows.filter((r) => typeof r[d] === "number")
      .map((r) => r[d] as number);
    return { min: Math.min(...vals), max: Math.max(...vals) };
  });
  const yFor = (dimIdx: number, value: number) => {
    const { min, max } = ranges[dimIdx];
    const t = max === min ? 0.5 : (value - min) / (max - min);
    return height - pad - t * (height - 2 * pad);
  };

  const ns = "http://www.w3.org/2000/svg";
  dims.forEach((dim, i) => {
    const axis = document.createElementNS(ns, "line");
    axis.setAttribute("x1", String(xFor(i)));
    axis.setAttribute("x2", String(xFor(i)));
    axis.setAttribute("y1", String(pad));
    axis.setAttribute("y2", String(height - pad));
    axis.setAttribute("class", "pc-axis");
    axis.setAttribute("data-dim", dim);
    svg.appendChild(axis);
    const label = document.createElementNS(ns, "text");
    label.setAttribute("x", String(xFor(i)));
    label.setAttribute("y", String(height - 8));
    label.setAttribute("class", "pc-axis-label");
    label.textContent = dim.replace("param_", "");
    svg.appendChild(label);
  });

  for (const row of rows) {
    if (row.error) continue;
    const points = dims
      .map((d, i) => (typeof row[d] === "number"
        ? `${xFor(i)},${yFor(i, row[d] as number)}` : null))
      .filter((p): p is string => p !== null);
    const line = document.createElementNS(ns, "polyline");
    line.setAttribute("points", points.join(" "));
    line.setAttribute("class", row.selected ? "pc-line selected" : "pc-line");
    line.setAttribute("data-config", String(row.config));
    line.setAttribute("fill", "none");
    svg.appendChild(line);
  }
}

export function renderMiningCard(container: HTMLElement,
                                 detail: MinerDetail | null, flipped: boolean,
                                 handlers: MiningHandlers): void {
  container.innerHTML = "";
  const card = document.createElement("div");
  card.className = flipped ? "mining-card flipped" : "mining-card";
  container.appendChild(card);
  if (detail === null) {
    card.textContent = "select a miner node";
    return;
  }

  const front = document.createElement("div");
  front.className = "card-front";
  const selected = detail.rows.find((r) => r.selected);
  front.textContent = `${detail.method}: ${detail.rows.length} configurations` +
    (selected && typeof selected["e_m"] === "number"
      ? `, best e_m ${(selected["e_m"] as number).toFixed(3)}` : "");
  card.appendChild(front);

  const back = document.createElement("div");
  back.className = "card-back";
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.classList.add("pc-plot");
  back.appendChild(svg);
  renderParallelCoordinates(svg, detail.rows);

  const form = document.createElement("form");
  form.className = "add-config";
  const input = document.createElement("input");
  input.name = "params";
  input.placeholder = '{"k": 8, "alpha": 0.1}';
  form.appendChild(input);
  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "add configuration";
  form.appendChild(submit);
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    try {
      const params = JSON.parse(input.value || "{}") as Record<string, unknown>;
      handlers.onAddConfig(params);
    } catch {
      input.classList.add("invalid");
    }
  });
  back.appendChild(form);
  card.appendChild(back);
}
