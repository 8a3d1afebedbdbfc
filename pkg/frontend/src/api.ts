// Typed client for the analysis service. Every number shown in the console
// comes from these responses; the console itself does no electrical math.

export interface ViolationRow {
  bus_id: string;
  nominal_kv: number;
  voltage_pct: number;
  class: string;
}

export interface ContingencyReport {
  contingency: string;
  kind: string;
  status: string;
  severity_index: number;
  counts: Record<string, number>;
  rows: ViolationRow[];
}

export interface ViolationsResponse {
  sequence: number;
  as_of: number;
  contingencies: ContingencyReport[];
}

export interface RankingEntry {
  rank: number;
  contingency: string;
  kind: string;
  status: string;
  severity_index: number;
  worst_deviation: number;
  violations: number;
}

export interface HistoryRecord {
  timestamp: number;
  sequence: number;
  total_load_mw: number;
  worst_bus: string | null;
  worst_voltage_pct: number | null;
  top_contingency: string | null;
  top_severity_index: number;
  violation_counts: Record<string, number>;
}

export interface CycleEvent {
  sequence: number;
  as_of: number;
  duration_ms: number;
  base_violations: number;
  top_contingency: string | null;
  top_severity_index: number;
}

export interface ModelInfo {
  name: string;
  buses: string[];
  breakers: string[];
  generators: string[];
  load_groups: string[];
  loads: string[];
  contingencies: { id: string; kind: string; description: string }[];
  plans: { id: string; intended_contingency: string; description: string }[];
}

export interface ActionDraft {
  kind: string;
  breaker?: string;
  open?: string;
  close?: string;
  group?: string;
  generator?: string;
  p_mw?: number;
  note?: string;
}

export interface LoadDeltaDraft {
  bus: string;
  delta_p_mw: number;
  delta_q_mvar: number;
}

export interface WhatIfRequest {
  contingency?: string;
  ras_plan?: string;
  actions?: ActionDraft[];
  load_delta?: LoadDeltaDraft[];
}

export interface WhatIfResult {
  contingency: string | null;
  plan: string | null;
  cleared: boolean;
  max_drop_vs_steady_state_pct: number;
  statuses: Record<string, string>;
  post_severity_index: number;
  violations_before: ViolationRow[];
  violations_after: ViolationRow[];
  counts_before: Record<string, number>;
  counts_after: Record<string, number>;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function getJson<T>(url: string): Promise<T> {
  const res = await fetch(url);
  if (!res.ok) {
    throw new ApiError(res.status, await extractDetail(res));
  }
  return (await res.json()) as T;
}

async function extractDetail(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return `${res.status} ${res.statusText}`;
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  model(): Promise<ModelInfo> {
    return getJson(`${this.baseUrl}/api/model`);
  }

  violations(): Promise<ViolationsResponse> {
    return getJson(`${this.baseUrl}/api/violations`);
  }

  ranking(): Promise<RankingEntry[]> {
    return getJson(`${this.baseUrl}/api/ranking`);
  }

  history(fromMs: number, toMs: number): Promise<HistoryRecord[]> {
    return getJson(`${this.baseUrl}/api/history?from=${fromMs}&to=${toMs}`);
  }

  async whatif(request: WhatIfRequest): Promise<WhatIfResult> {
    const res = await fetch(`${this.baseUrl}/api/whatif`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!res.ok) {
      throw new ApiError(res.status, await extractDetail(res));
    }
    return (await res.json()) as WhatIfResult;
  }
}

// --- server-sent events -----------------------------------------------------
// Implemented over fetch streaming so the same code runs in the browser and
// under Node for tests.

export interface StreamHandle {
  close(): void;
}

export function parseSseChunk(chunk: string): string | null {
  const dataLines = chunk
    .split("\n")
    .filter((line) => line.startsWith("data:"))
    .map((line) => line.slice("data:".length).trimStart());
  if (dataLines.length === 0) return null;
  return dataLines.join("\n");
}

export function subscribeCycles(
  baseUrl: string,
  onEvent: (event: CycleEvent) => void,
  onDisconnect: (reason: string) => void,
): StreamHandle {
  const controller = new AbortController();
  void (async () => {
    try {
      const res = await fetch(`${baseUrl}/api/stream`, {
        signal: controller.signal,
        headers: { Accept: "text/event-stream" },
      });
      if (!res.ok || res.body === null) {
        onDisconnect(`stream request failed with status ${res.status}`);
        return;
      }
      const reader = res.body.getReader();
      const decoder = new TextDecoder();
      let buffer = "";
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        let boundary: number;
        while ((boundary = buffer.indexOf("\n\n")) >= 0) {
          const chunk = buffer.slice(0, boundary);
          buffer = buffer.slice(boundary + 2);
          const data = parseSseChunk(chunk);
          if (data !== null) {
            onEvent(JSON.parse(data) as CycleEvent);
          }
        }
      }
      if (!controller.signal.aborted) onDisconnect("stream ended");
    } catch (err) {
      if (!controller.signal.aborted) {
        onDisconnect(err instanceof Error ? err.message : String(err));
      }
    }
  })();
  return {
    close: () => controller.abort(),
  };
}
