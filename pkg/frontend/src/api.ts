import type {
  DrilldownPage,
  Plan,
  SessionCreated,
  SourceDocument,
  Trace,
  TurnResponse,
  Violation,
} from "./types";

export class ApiError extends Error {
  status: number;
  violations: Violation[];
  operatorId?: string;

  constructor(status: number, message: string, violations: Violation[] = [], operatorId?: string) {
    super(message);
    this.status = status;
    this.violations = violations;
    this.operatorId = operatorId;
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail = (body as { detail?: { error?: string; violations?: Violation[]; operator_id?: string } }).detail;
    throw new ApiError(
      response.status,
      detail?.error ?? `HTTP ${response.status}`,
      detail?.violations ?? [],
      detail?.operator_id,
    );
  }
  return body as T;
}

export const api = {
  listIndexes: () => request<{ indexes: string[] }>("/indexes"),
  createSession: (indexName: string) =>
    request<SessionCreated>("/sessions", { method: "POST", body: JSON.stringify({ index_name: indexName }) }),
  postQuery: (sessionId: string, text: string) =>
    request<TurnResponse>(`/sessions/${sessionId}/query`, { method: "POST", body: JSON.stringify({ text }) }),
  putPlan: (sessionId: string, turnIndex: number, plan: Plan) =>
    request<TurnResponse>(`/sessions/${sessionId}/turns/${turnIndex}/plan`, {
      method: "PUT",
      body: JSON.stringify({ plan }),
    }),
  getTrace: (traceId: string) => request<Trace>(`/traces/${traceId}`),
  getOperatorDocs: (traceId: string, opId: string, offset = 0, limit = 10) =>
    request<DrilldownPage>(`/traces/${traceId}/operators/${opId}/docs?offset=${offset}&limit=${limit}`),
  getDocument: (docId: string) => request<SourceDocument>(`/docs/${encodeURIComponent(docId)}`),
};
