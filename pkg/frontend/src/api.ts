// Typed client over the local review API. Pure fetch wrapper: every call maps
// one-to-one onto a documented endpoint and no ontology logic lives here.

export interface Provenance {
  template_id: string;
  technique: string;
  prompt_hash: string;
  provider_id: string;
  timestamp: string;
}

export interface Proposal {
  id: string;
  kind: string;
  payload: Record<string, unknown>;
  status: "Pending" | "Accepted" | "Rejected" | "Edited";
  provenance?: Provenance;
  original_payload?: Record<string, unknown>;
  reason?: string;
}

export interface ModeletSummary {
  id: string;
  title: string;
  status: string;
  covered_cq_ids: string[];
  gate_report: GateReport | null;
}

export interface ProjectSummary {
  name: string;
  namespace: string;
  prefix_label: string;
  stage_status: Record<string, string>;
  stage_order: string[];
  proposal_counts: Record<string, number>;
  glossary_size: number;
  icqs: { id: string; question: string; status: string }[];
  modelets: ModeletSummary[];
  test_case_count: number;
  feedback_count: number;
  triple_count: number;
}

export interface MetricsPayload {
  base: Record<string, number | string>;
  schema: Record<string, string | boolean>;
  unrecognized_constructs: string[];
}

export interface CaseOutcome {
  case_id: string;
  cq_id: string;
  status: "pass" | "fail" | "error";
  expected: string;
  actual: string;
}

export interface Finding {
  check_id: string;
  severity: "Error" | "Warning";
  subject: string;
  message: string;
}

export interface TestsPayload {
  model: Finding[];
  data: Finding[];
  query: {
    total: number;
    passes: number;
    failures: number;
    errors: number;
    duration_s: number;
    outcomes: CaseOutcome[];
  };
}

export interface GateReport {
  modelet: string;
  model_errors: Finding[];
  failed_cases: CaseOutcome[];
}

export interface LogEntry {
  seq: number;
  timestamp: string;
  actor: string;
  action: string;
  subject: string;
  detail: Record<string, unknown>;
}

export interface Decision {
  proposal: string;
  verdict: "accept" | "reject" | "edit";
  payload?: Record<string, unknown>;
  reason?: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public kind: string,
    message: string,
    public detail?: unknown,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let kind = "HttpError";
  let message = `${response.status}`;
  let detail: unknown;
  try {
    const body = await response.json();
    kind = body.error ?? kind;
    message = body.message ?? message;
    detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, kind, message, detail);
}

export class OntoforgeClient {
  constructor(private baseUrl: string) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  project(): Promise<ProjectSummary> {
    return this.getJson("/api/project");
  }

  proposals(status?: string): Promise<Proposal[]> {
    const suffix = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.getJson(`/api/proposals${suffix}`);
  }

  submitDecisions(decisions: Decision[]): Promise<{ applied: number }> {
    return this.postJson("/api/decisions", decisions);
  }

  runStage(stage: string, options: { focus?: string; covers?: string[]; k?: number } = {}) {
    return this.postJson<{ stage: string; status: string; proposals: Proposal[] }>(
      `/api/stages/${encodeURIComponent(stage)}/run`,
      options,
    );
  }

  revertStage(stage: string) {
    return this.postJson<{ stage: string; stage_status: Record<string, string> }>(
      `/api/stages/${encodeURIComponent(stage)}/revert`,
      {},
    );
  }

  mergeModelet(id: string) {
    return this.postJson<{ modelet: string; status: string }>(
      `/api/modelets/${encodeURIComponent(id)}/merge`,
      {},
    );
  }

  metrics(): Promise<MetricsPayload> {
    return this.getJson("/api/metrics");
  }

  testsReport(): Promise<TestsPayload> {
    return this.getJson("/api/tests/report");
  }

  log(tail = 30): Promise<LogEntry[]> {
    return this.getJson(`/api/log?tail=${tail}`);
  }

  async ontologyTurtle(): Promise<string> {
    const response = await fetch(this.baseUrl + "/api/ontology.ttl");
    if (!response.ok) throw await parseError(response);
    return response.text();
  }
}
