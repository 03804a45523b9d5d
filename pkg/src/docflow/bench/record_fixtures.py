"""Regenerate the frozen planner fixtures and golden plan files.

Builds the default benchmark corpus in a temp dir, ingests it in-process to
recover the exact schema the service will see, renders the exact planner
prompts for all benchmark questions (including the follow-up turn with its
conversation history), and freezes prompt-hash → golden-plan-JSON pairs.

Run after changing planner prompts, the corpus generator, or a golden plan:

    python3 -m docflow.bench.record_fixtures
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from docflow.bench.corpus import BENCH_INDEX, SyntheticCorpusSpec, generate
from docflow.bench.golden_plans import ALL_PLANS, GOLDEN_PLANS
from docflow.bench.questions import INGEST_FIELDS, QUESTIONS, QUESTIONS_BY_ID
from docflow.engine import Context
from docflow.llm.providers import record_fixture
from docflow.model.document import canonical_json
from docflow.model.schema import DocSetSchema
from docflow.planner import LogicalPlan, Planner, validate
from docflow.planner.planner import load_default_fewshot
from docflow.planner.prompts import PLANNER_SYSTEM, build_prompt_bundle

DATA_DIR = Path(__file__).parent / "data"


def build_benchmark_schema(workdir: Path) -> tuple[DocSetSchema, dict]:
    corpus_dir = workdir / "corpus"
    generate(SyntheticCorpusSpec(), corpus_dir)
    ctx = Context(data_dir=workdir / "engine")
    ctx.read_docparse(corpus_dir / "docs").llm_extract(INGEST_FIELDS).explode().embed().write(BENCH_INDEX)
    truth = json.loads((corpus_dir / "ground_truth.json").read_text(encoding="utf-8"))
    return ctx.stores.open(BENCH_INDEX).schema, truth


def _normalized(qid: str, plan_dict: dict) -> dict:
    return LogicalPlan.from_dict(plan_dict, plan_dict.get("query", "")).to_dict()


def _response_payload(normalized: dict) -> str:
    return canonical_json({"nodes": normalized["nodes"], "result_node": normalized["result_node"]}).decode("utf-8")


def record(out_dir: Path = DATA_DIR) -> dict:
    with tempfile.TemporaryDirectory() as tmp:
        schema, truth = build_benchmark_schema(Path(tmp))

    fewshot = load_default_fewshot()
    plans_dir = out_dir / "golden_plans"
    plans_dir.mkdir(parents=True, exist_ok=True)

    fixtures: list[dict] = []
    for qid, plan_dict in ALL_PLANS.items():
        normalized = _normalized(qid, plan_dict)
        plan = LogicalPlan.from_dict(normalized, normalized["query"])
        violations = validate(plan, schema, BENCH_INDEX)
        if violations:
            raise RuntimeError(f"golden plan {qid} is invalid: {[v.to_dict() for v in violations]}")
        (plans_dir / f"{qid}.json").write_text(
            json.dumps(normalized, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    for q in QUESTIONS:
        history = []
        for setup_id in q.setup:
            setup_q = QUESTIONS_BY_ID[setup_id]
            setup_plan = _normalized(setup_id, GOLDEN_PLANS[setup_id])
            history.append(
                {
                    "query": setup_q.text,
                    "plan": setup_plan,
                    "answer": str(truth["questions"][setup_id]["value"]),
                }
            )
        bundle = build_prompt_bundle(q.text, schema, fewshot, history, BENCH_INDEX)
        normalized = _normalized(q.id, GOLDEN_PLANS[q.id])
        fixtures.append(record_fixture(PLANNER_SYSTEM, bundle.render_user(), _response_payload(normalized)))

    fixture_path = out_dir / "planner_fixtures.json"
    fixture_path.write_text(json.dumps(fixtures, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return {"fixtures": str(fixture_path), "golden_plans": str(plans_dir), "count": len(fixtures)}


def main() -> None:
    result = record()
    print(f"wrote {result['count']} planner fixtures to {result['fixtures']}")
    print(f"golden plans under {result['golden_plans']}")


if __name__ == "__main__":
    main()
