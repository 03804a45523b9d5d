import { describe, expect, it } from "vitest";
import { edges, levelLayout, planSummary, topoOrder } from "../src/plangraph";
import fixtures from "./fixtures/service.json";
import type { Plan } from "../src/types";

const cessnaPlan = fixtures.cessna_turn.plan as Plan;

const diamond: Plan = {
  query: "fraction",
  result_node: "gen",
  nodes: [
    { id: "a", op: "QueryDatabase", params: {}, inputs: [], description: "" },
    { id: "b", op: "Count", params: {}, inputs: ["a"], description: "" },
    { id: "c", op: "QueryDatabase", params: {}, inputs: [], description: "" },
    { id: "d", op: "Count", params: {}, inputs: ["c"], description: "" },
    { id: "gen", op: "LlmGenerate", params: {}, inputs: ["b", "d"], description: "" },
  ],
};

describe("plan graph helpers", () => {
  it("orders the published walkthrough plan as scan → extract", () => {
    expect(planSummary(cessnaPlan)).toBe("QueryDatabase → LlmExtract");
  });

  it("topologically orders multi-branch plans", () => {
    const order = topoOrder(diamond).map((n) => n.id);
    expect(order.indexOf("a")).toBeLessThan(order.indexOf("b"));
    expect(order.indexOf("c")).toBeLessThan(order.indexOf("d"));
    expect(order.at(-1)).toBe("gen");
  });

  it("lays nodes out by depth, isomorphic to the plan", () => {
    const rows = levelLayout(diamond);
    expect(rows[0].map((n) => n.id).sort()).toEqual(["a", "c"]);
    expect(rows[1].map((n) => n.id).sort()).toEqual(["b", "d"]);
    expect(rows[2].map((n) => n.id)).toEqual(["gen"]);
    const flattened = rows.flat().map((n) => n.id).sort();
    expect(flattened).toEqual(diamond.nodes.map((n) => n.id).sort());
  });

  it("emits every edge exactly once", () => {
    expect(edges(diamond).sort()).toEqual(
      [
        ["a", "b"],
        ["b", "gen"],
        ["c", "d"],
        ["d", "gen"],
      ].sort(),
    );
  });
});
