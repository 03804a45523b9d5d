// Pure plan-DAG helpers: topological ordering, level layout, summaries.
// The rendered DAG must stay isomorphic to the plan JSON, so everything here
// derives from the nodes/inputs lists alone.

import type { Plan, PlanNode } from "./types";

export function topoOrder(plan: Plan): PlanNode[] {
  const byId = new Map(plan.nodes.map((n) => [n.id, n]));
  const indegree = new Map(plan.nodes.map((n) => [n.id, 0]));
  const consumers = new Map<string, string[]>(plan.nodes.map((n) => [n.id, []]));
  for (const node of plan.nodes) {
    for (const input of node.inputs) {
      if (byId.has(input)) {
        indegree.set(node.id, (indegree.get(node.id) ?? 0) + 1);
        consumers.get(input)!.push(node.id);
      }
    }
  }
  const queue = plan.nodes.filter((n) => (indegree.get(n.id) ?? 0) === 0).map((n) => n.id);
  const out: PlanNode[] = [];
  while (queue.length > 0) {
    const id = queue.shift()!;
    out.push(byId.get(id)!);
    for (const consumer of consumers.get(id) ?? []) {
      const remaining = (indegree.get(consumer) ?? 0) - 1;
      indegree.set(consumer, remaining);
      if (remaining === 0) queue.push(consumer);
    }
  }
  return out;
}

/** Depth per node: sources at level 0; every consumer one past its deepest input. */
export function levelLayout(plan: Plan): PlanNode[][] {
  const levels = new Map<string, number>();
  for (const node of topoOrder(plan)) {
    const depth = node.inputs.length
      ? Math.max(...node.inputs.map((i) => (levels.get(i) ?? -1) + 1))
      : 0;
    levels.set(node.id, depth);
  }
  const rows: PlanNode[][] = [];
  for (const node of plan.nodes) {
    const depth = levels.get(node.id) ?? 0;
    while (rows.length <= depth) rows.push([]);
    rows[depth].push(node);
  }
  return rows;
}

/** One-line intent summary, e.g. "QueryDatabase → LlmExtract". */
export function planSummary(plan: Plan): string {
  return topoOrder(plan)
    .map((n) => n.op)
    .join(" → ");
}

export function edges(plan: Plan): Array<[string, string]> {
  const out: Array<[string, string]> = [];
  for (const node of plan.nodes) {
    for (const input of node.inputs) out.push([input, node.id]);
  }
  return out;
}
