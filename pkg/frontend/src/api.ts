import type {
  DisplayNode, MinerDetail, RawNode, Report, SessionCreated, TraceResult, VizSpec,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json() as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch { /* non-JSON error body */ }
    throw new ApiError(resp.status, detail);
  }
  return resp.json() as Promise<T>;
}

/** Thin typed client; every highlight set the UI shows comes verbatim from
 * the trace endpoints here, never from local joins. */
export class ApiClient {
  constructor(private base: string = "/api/v1") {}

  createSession(goal: string, scenario?: string): Promise<SessionCreated> {
    return request(`${this.base}/sessions`, {
      method: "POST",
      body: JSON.stringify({ goal, scenario: scenario ?? null, auto: true }),
    });
  }

  getTree(sid: string): Promise<DisplayNode> {
    return request(`${this.base}/sessions/${sid}/tree`);
  }

  expandNode(sid: string, displayId: string): Promise<{ nodes: RawNode[] }> {
    return request(`${this.base}/sessions/${sid}/nodes/${displayId}/expand`,
      { method: "POST" });
  }

  minerDetail(sid: string, nodeId: string): Promise<MinerDetail> {
    return request(`${this.base}/sessions/${sid}/nodes/${nodeId}/miner`);
  }

  addConfig(sid: string, nodeId: string,
            params: Record<string, unknown>): Promise<MinerDetail> {
    return request(`${this.base}/sessions/${sid}/nodes/${nodeId}/configs`, {
      method: "POST",
      body: JSON.stringify({ params }),
    });
  }

  refine(sid: string, goal: string): Promise<{ new_nodes: string[] }> {
    return request(`${this.base}/sessions/${sid}/refine`, {
      method: "POST",
      body: JSON.stringify({ goal }),
    });
  }

  getReport(sid: string): Promise<Report> {
    return request(`${this.base}/sessions/${sid}/report`);
  }

  getViz(sid: string, vizId: string): Promise<VizSpec> {
    return request(`${this.base}/sessions/${sid}/viz/${vizId}`);
  }

  trace(sid: string, element: string, target: string): Promise<TraceResult> {
    const q = new URLSearchParams({ element, target });
    return request(`${this.base}/sessions/${sid}/trace?${q}`);
  }

  traceWindow(sid: string, start: number, end: number,
              target: string): Promise<TraceResult> {
    const q = new URLSearchParams({
      start: String(start), end: String(end), target,
    });
    return request(`${this.base}/sessions/${sid}/trace_window?${q}`);
  }
}
