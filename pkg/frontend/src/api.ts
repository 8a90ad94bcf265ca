/** Typed client for the risk-network analysis API. All numbers arrive as
 * plain JSON doubles; the UI never does probability arithmetic on them
 * beyond display rounding. */

export interface NodeSummary {
  id: string;
  label: string;
  states: string[];
  layer: string;
  description: string;
  parents: string[];
}

export interface Edge {
  parent: string;
  child: string;
}

export interface NetworkSummary {
  name: string;
  version: string;
  threshold_statement: string;
  nodes: NodeSummary[];
  edges: Edge[];
  threshold_nodes: string[];
}

export interface Evidence {
  hard: Record<string, string>;
  soft: Record<string, number[]>;
}

export interface Assessment {
  threshold_node: string;
  posterior: Record<string, number>;
  alarm: boolean;
  alarm_rule: { state: string; cutoff: number };
}

export interface QueryResult {
  evidence: Evidence;
  log_evidence: number;
  marginals: Record<string, Record<string, number>>;
  assessment: Assessment | null;
}

export interface SensitivityEntry {
  source: string;
  state: string;
  low: number;
  high: number;
  range: number;
}

export interface SensitivityResult {
  target: { node: string; state: string };
  baseline: number;
  delta: number;
  entries: SensitivityEntry[];
}

export interface ScenarioRow {
  name: string;
  status: "ok" | "inconsistent";
  assessment: Assessment | null;
}

export interface ScenarioRunResult {
  threshold_node: string;
  alarm_rule: { state: string; cutoff: number };
  results: ScenarioRow[];
}

export interface ValidityResult {
  nomological: {
    passed: boolean;
    violations: { parent: string; child: string }[];
  };
}

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(base: string, path: string, body?: unknown): Promise<T> {
  const resp = await fetch(base + path, {
    method: body === undefined ? "GET" : "POST",
    headers: body === undefined ? {} : { "Content-Type": "application/json" },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  const text = await resp.text();
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new ApiError("bad_response", `non-JSON response from ${path}`);
  }
  if (!resp.ok) {
    const err = (doc as { error?: { code?: string; message?: string } }).error;
    throw new ApiError(err?.code ?? "http_error", err?.message ?? resp.statusText);
  }
  return doc as T;
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  network(): Promise<NetworkSummary> {
    return request(this.base, "/api/network");
  }

  query(evidence: Evidence): Promise<QueryResult> {
    return request(this.base, "/api/query", { evidence });
  }

  sensitivity(node: string, state: string, delta: number): Promise<SensitivityResult> {
    return request(this.base, "/api/sensitivity", {
      target: { node, state },
      delta,
    });
  }

  runScenarios(scenarios: unknown[]): Promise<ScenarioRunResult> {
    return request(this.base, "/api/scenarios/run", { scenarios });
  }

  validate(): Promise<ValidityResult> {
    return request(this.base, "/api/validate", {});
  }
}

/** Same-origin when served by the API process; localhost default otherwise. */
export function detectBase(): string {
  if (typeof window !== "undefined" && window.location.protocol.startsWith("http")) {
    return "";
  }
  return "http://127.0.0.1:8790";
}
