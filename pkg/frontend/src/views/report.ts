import type { Report } from "../types.js";

export interface ReportHandlers {
  onItemHover: (insightId: string | null, sourceNode: string | null) => void;
}

const SLOTS = ["who", "what", "when", "where", "why"] as const;

export function renderReport(container: HTMLElement, report: Report | null,
                             handlers: ReportHandlers): void {
  container.innerHTML = "";
  if (report === null) {
    container.textContent = "report not composed yet";
    return;
  }
  if (report.advisory) {
    const note = document.createElement("p");
    note.className = "advisory";
    note.textContent = report.advisory;
    container.appendChild(note);
  }
  report.items.forEach((item, idx) => {
    const card = document.createElement("article");
    card.className = "insight-item";
    card.dataset.insightId = item.insight_id;
    card.dataset.sourceNode = item.source_node;

    const head = document.createElement("h4");
    const e_r = report.evals[idx]?.e_r;
    head.textContent = item.insight_id +
      (typeof e_r === "number" ? ` (e_r ${e_r.toFixed(2)})` : "");
    card.appendChild(head);

    const table = document.createElement("dl");
    table.className = "five-w";
    for (const slot of SLOTS) {
      const value = item.five_w[slot];
      const dt = document.createElement("dt");
      dt.textContent = slot;
      const dd = document.createElement("dd");
      dd.textContent = value ?? "—";
      dd.className = value ? "filled" : "empty";
      table.appendChild(dt);
      table.appendChild(dd);
    }
    card.appendChild(table);

    const narrative = document.createElement("p");
    narrative.className = "narrative";
    narrative.textContent = item.narrative;
    card.appendChild(narrative);

    const refs = document.createElement("p");
    refs.className = "view-refs";
    refs.textContent = `views: ${item.view_refs.join(", ")}`;
    card.appendChild(refs);

    card.addEventListener("mouseenter",
      () => handlers.onItemHover(item.insight_id, item.source_node));
    card.addEventListener("mouseleave", () => handlers.onItemHover(null, null));
    container.appendChild(card);
  });
}

/** Reverse direction of the cross-highlight: tree hover -> insight cards. */
export function highlightItemsForNodes(container: HTMLElement,
                                       nodeIds: string[]): void {
  const wanted = new Set(nodeIds);
  container.querySelectorAll<HTMLElement>(".insight-item").forEach((el) => {
    el.classList.toggle("highlighted",
      wanted.has(el.dataset.sourceNode ?? ""));
  });
}
