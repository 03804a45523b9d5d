// Shapes mirror the service's JSON bodies (see docs/openapi.json).

export interface PlanNode {
  id: string;
  op: string;
  params: Record<string, unknown>;
  inputs: string[];
  description: string;
}

export interface Plan {
  query: string;
  result_node: string;
  nodes: PlanNode[];
}

export interface Violation {
  code: string;
  message: string;
  node_id?: string;
  field?: string;
}

export interface Answer {
  kind: "scalar" | "table" | "docs" | "text";
  text: string;
  scalar?: number | string | null;
  rows?: Record<string, unknown>[] | null;
  doc_ids?: string[] | null;
}

export interface TurnResponse {
  session_id: string;
  turn_index: number;
  plan: Plan;
  rewritten_plan: Plan;
  script: string;
  answer: Answer;
  trace_id: string;
  edited: boolean;
}

export interface TraceOperator {
  op_id: string;
  op_kind: string;
  input_count: number;
  output_count: number;
  duration_ms: number;
  sample: SampleDoc[];
  llm_entries: number[];
  notes: Record<string, unknown>;
}

export interface Trace {
  run_id: string;
  operators: TraceOperator[];
  lineage_edges: Record<string, string[]>;
  roots: string[];
  llm_transcript: unknown[];
  result: Record<string, unknown>;
  counters: Record<string, unknown>;
}

export interface SampleDoc {
  doc_id: string;
  content?: { text?: string };
  properties: Record<string, unknown>;
  lineage: string[];
  children?: unknown;
}

export interface DrilldownPage {
  op_id: string;
  op_kind: string;
  input_count: number;
  output_count: number;
  sample_total: number;
  docs: SampleDoc[];
}

export interface SourceElement {
  element_id: string;
  kind: string;
  text_representation?: string;
  type_specific?: Record<string, unknown>;
}

export interface SourceDocument {
  index: string;
  document: {
    doc_id: string;
    content?: { text?: string };
    children: SourceElement[];
    properties: Record<string, unknown>;
    lineage: string[];
  };
}

export interface SessionCreated {
  session_id: string;
  index_name: string;
}
