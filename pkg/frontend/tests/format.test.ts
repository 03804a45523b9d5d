import { describe, expect, it } from "vitest";
import { answerSummary, checkEditBuffer, prettyPlan, tableColumns } from "../src/format";
import fixtures from "./fixtures/service.json";
import type { Answer, Plan } from "../src/types";

describe("answer rendering", () => {
  it("renders scalars, docs, tables, and text", () => {
    expect(answerSummary({ kind: "scalar", text: "94", scalar: 94 } as Answer)).toBe("94");
    expect(answerSummary({ kind: "text", text: "hello" } as Answer)).toBe("hello");
    expect(
      answerSummary({ kind: "docs", text: "", doc_ids: ["A", "B"] } as Answer),
    ).toBe("2 documents: A, B");
    expect(answerSummary({ kind: "table", text: "", rows: [{ a: 1 }, { a: 2 }] } as Answer)).toBe("2 rows");
  });

  it("collects table columns across ragged rows", () => {
    expect(tableColumns([{ a: 1 }, { b: 2 }])).toEqual(["a", "b"]);
  });
});

describe("edit buffer pre-check", () => {
  const plan = fixtures.cessna_turn.plan as Plan;

  it("accepts the service's own plan JSON", () => {
    const check = checkEditBuffer(prettyPlan(plan));
    expect(check.errors).toEqual([]);
    expect(check.plan?.result_node).toBe(plan.result_node);
  });

  it("rejects non-JSON and structural nonsense", () => {
    expect(checkEditBuffer("{oops").errors[0]).toMatch(/not valid JSON/);
    expect(checkEditBuffer('{"nodes": 4}').errors[0]).toMatch(/nodes list/);
    const broken = JSON.parse(prettyPlan(plan));
    broken.result_node = "ghost";
    expect(checkEditBuffer(JSON.stringify(broken)).errors.join(" ")).toMatch(/ghost/);
    const dangling = JSON.parse(prettyPlan(plan));
    dangling.nodes[1].inputs = ["missing"];
    expect(checkEditBuffer(JSON.stringify(dangling)).errors.join(" ")).toMatch(/unknown input/);
  });
});
