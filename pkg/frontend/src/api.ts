// Typed client for the run-steering service. Every mutation of run state
// goes through one of these methods, so a steering session can be audited
// from the browser's network log alone.

export interface RunSummary {
  run_id: string;
  algorithm: string;
  domain: string;
  seed: number;
  budget: number;
  generation: number;
  evaluations: number;
  finished: boolean;
  supports_preferences: boolean;
  resolution: number[] | null;
  descriptor_names: string[];
}

export interface StepResult {
  run_id: string;
  generation: number;
  evaluations: number;
  finished: boolean;
}

export interface FavorAck {
  acknowledged: boolean;
  cell: number[];
  weight: number;
}

export interface ArchiveCell {
  cell: number[];
  fitness: number;
  individual_id: number;
}

export interface ArchivePayload {
  run_id: string;
  generation: number;
  evaluations: number;
  axes: number[];
  resolution: number[];
  bounds: number[][];
  descriptor_names: string[];
  coverage: number;
  qd_score: number;
  best_fitness: number | null;
  heatmap: (number | null)[][];
  cells: ArchiveCell[];
}

export interface LineageNode {
  individual_id: number;
  generation: number;
  operation: string;
  fitness: number;
  parents: number[];
}

export interface IndividualDetail {
  run_id: string;
  id: number;
  generation: number;
  operation: string;
  parents: number[];
  genome_text: string;
  fitness: number;
  descriptor: number[];
  feasible: boolean;
  infeasibility: number;
  lineage: LineageNode[];
}

export interface MetricsPayload {
  run_id: string;
  generation: number;
  evaluations: number;
  finished: boolean;
  metrics: Record<string, number>[];
  selection_counts: Record<string, number> | null;
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly code: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  const body: unknown = await response.json().catch(() => null);
  if (!response.ok) {
    const envelope = (body as { error?: { code?: string; message?: string } } | null)?.error;
    // surface the server's message verbatim; fall back to the status code
    throw new ApiError(
      envelope?.message ?? `request failed with status ${response.status}`,
      envelope?.code ?? "http_error",
      response.status,
    );
  }
  return body as T;
}

function jsonInit(method: string, payload: unknown): RequestInit {
  return {
    method,
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  };
}

export class ExplorerClient {
  constructor(readonly baseUrl: string = "") {}

  async listRuns(): Promise<RunSummary[]> {
    const body = await request<{ runs: RunSummary[] }>(`${this.baseUrl}/runs`);
    return body.runs;
  }

  createRun(config: unknown): Promise<RunSummary> {
    return request(`${this.baseUrl}/runs`, jsonInit("POST", config));
  }

  getRun(runId: string): Promise<RunSummary> {
    return request(`${this.baseUrl}/runs/${runId}`);
  }

  step(runId: string, generations: number): Promise<StepResult> {
    return request(`${this.baseUrl}/runs/${runId}/step`, jsonInit("POST", { generations }));
  }

  favorCell(runId: string, cell: number[], weight: number): Promise<FavorAck> {
    return request(`${this.baseUrl}/runs/${runId}/preferences`, jsonInit("POST", { cell, weight }));
  }

  archive(runId: string, axes: readonly [number, number]): Promise<ArchivePayload> {
    return request(`${this.baseUrl}/runs/${runId}/archive?ax=${axes[0]},${axes[1]}`);
  }

  individual(runId: string, individualId: number): Promise<IndividualDetail> {
    return request(`${this.baseUrl}/runs/${runId}/individuals/${individualId}`);
  }

  metrics(runId: string): Promise<MetricsPayload> {
    return request(`${this.baseUrl}/runs/${runId}/metrics`);
  }
}
