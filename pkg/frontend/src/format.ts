// Answer rendering and the plan edit buffer's client-side pre-check.
// Full validation is the service's job (422 with node-accurate violations);
// the pre-check only gates the re-run button on parseable, plausibly shaped JSON.

import type { Answer, Plan } from "./types";

export function answerSummary(answer: Answer): string {
  if (answer.kind === "scalar") return String(answer.scalar ?? answer.text);
  if (answer.kind === "text") return answer.text;
  if (answer.kind === "docs") {
    const ids = answer.doc_ids ?? [];
    const shown = ids.slice(0, 8).join(", ");
    return `${ids.length} documents${ids.length ? `: ${shown}${ids.length > 8 ? ", …" : ""}` : ""}`;
  }
  return `${answer.rows?.length ?? 0} rows`;
}

export function tableColumns(rows: Record<string, unknown>[]): string[] {
  const cols = new Set<string>();
  for (const row of rows) for (const key of Object.keys(row)) cols.add(key);
  return [...cols];
}

export interface EditCheck {
  plan?: Plan;
  errors: string[];
}

export function checkEditBuffer(text: string): EditCheck {
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch (err) {
    return { errors: [`not valid JSON: ${(err as Error).message}`] };
  }
  const errors: string[] = [];
  const plan = parsed as Plan;
  if (typeof plan !== "object" || plan === null || !Array.isArray(plan.nodes)) {
    return { errors: ["plan must be an object with a nodes list"] };
  }
  if (typeof plan.result_node !== "string" || !plan.result_node) {
    errors.push("plan must name a result_node");
  }
  const ids = new Set<string>();
  for (const node of plan.nodes) {
    if (!node || typeof node.id !== "string" || typeof node.op !== "string") {
      errors.push("every node needs a string id and op");
      continue;
    }
    if (ids.has(node.id)) errors.push(`duplicate node id ${node.id}`);
    ids.add(node.id);
  }
  for (const node of plan.nodes) {
    for (const input of node?.inputs ?? []) {
      if (!ids.has(input)) errors.push(`node ${node.id} references unknown input ${input}`);
    }
  }
  if (plan.result_node && ids.size && !ids.has(plan.result_node)) {
    errors.push(`result_node ${plan.result_node} is not a node`);
  }
  return errors.length ? { errors } : { plan, errors: [] };
}

export function prettyPlan(plan: Plan): string {
  return JSON.stringify(plan, null, 2);
}
