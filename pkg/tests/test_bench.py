import hashlib
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from docflow.bench.corpus import BENCH_INDEX, SyntheticCorpusSpec, generate
from docflow.bench.evaluator import recompute_answers
from docflow.bench.harness import classify_answer
from docflow.bench.questions import QUESTIONS, ground_truth
from docflow.cli import main as cli_main


def _tree_hash(root: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            digest.update(str(path.relative_to(root)).encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


def test_generation_is_byte_identical(tmp_path):
    spec = SyntheticCorpusSpec(seed=11, n_docs=20)
    generate(spec, tmp_path / "a")
    generate(spec, tmp_path / "b")
    assert _tree_hash(tmp_path / "a") == _tree_hash(tmp_path / "b")


def test_different_seed_different_corpus(tmp_path):
    generate(SyntheticCorpusSpec(seed=1, n_docs=20), tmp_path / "a")
    generate(SyntheticCorpusSpec(seed=2, n_docs=20), tmp_path / "b")
    assert _tree_hash(tmp_path / "a") != _tree_hash(tmp_path / "b")


def test_empty_corpus(tmp_path):
    incidents = generate(SyntheticCorpusSpec(n_docs=0), tmp_path / "zero")
    assert incidents == []
    truth = json.loads((tmp_path / "zero" / "ground_truth.json").read_text())["questions"]
    assert truth["q10"]["value"] == 0
    assert truth["q04"]["value"] == []


def test_population_shape_matches_the_documented_distribution(bench_corpus):
    truth = json.loads((bench_corpus / "ground_truth.json").read_text())["questions"]
    assert truth["q06"]["value"] == 94  # substantial-or-worse
    assert truth["q07"]["value"] == 21  # engine causes
    assert truth["q05"]["value"] == 0  # no Hawaii incidents
    assert len(truth["q04"]["value"]) == 2  # July bird strikes
    assert truth["q10"]["value"] == 100


def test_independent_evaluator_reproduces_ground_truth(bench_corpus):
    truth = json.loads((bench_corpus / "ground_truth.json").read_text())["questions"]
    recomputed = recompute_answers(bench_corpus)
    for qid, entry in truth.items():
        assert recomputed[qid] == entry["value"], qid


def test_question_taxonomy_coverage():
    categories = {q.category for q in QUESTIONS}
    assert categories == {"metadata-only", "hybrid", "semantic"}
    # the published failure families each have a probing question
    texts = " | ".join(q.text for q in QUESTIONS)
    assert "broken down by number of engines" in texts  # double counting
    assert "due to engine problems" in texts  # filter breadth
    assert "aircraft manufacturer" in texts  # schema interpretation


def test_disclaimer_toggle_adds_boilerplate(tmp_path):
    generate(SyntheticCorpusSpec(n_docs=3, include_disclaimer=True), tmp_path / "poisoned")
    doc = json.loads(next((tmp_path / "poisoned" / "docs").glob("*.json")).read_text())
    texts = [e.get("text_representation") or "" for e in doc["elements"]]
    assert any("does not assign fault or blame" in t for t in texts)


# -- verdict classification -----------------------------------------------------

def test_classify_scalar_exact_and_float_tolerance():
    gt = {"answer_type": "scalar", "value": 94}
    assert classify_answer(gt, {"kind": "scalar", "text": "94", "scalar": 94}) == "Correct"
    assert classify_answer(gt, {"kind": "scalar", "text": "93", "scalar": 93}) == "Incorrect"
    gt_float = {"answer_type": "scalar", "value": 12.75}
    assert classify_answer(gt_float, {"kind": "scalar", "text": "12.750000000001", "scalar": 12.750000000001}) == "Correct"


def test_classify_table_order_insensitive_with_projection():
    gt = {"answer_type": "table", "value": [["Cessna", 26], ["Piper", 21]], "columns": ["maker", "count"]}
    rows = [
        {"maker": "Piper", "count": 21, "extra": "ignored"},
        {"maker": "Cessna", "count": 26, "extra": "ignored"},
    ]
    assert classify_answer(gt, {"kind": "table", "text": "", "rows": rows}) == "Correct"
    rows[0]["count"] = 20
    assert classify_answer(gt, {"kind": "table", "text": "", "rows": rows}) == "Incorrect"


def test_classify_doc_list_set_match_and_text_fallback():
    gt = {"answer_type": "doc-list", "value": ["CEN24LA012", "CEN24LA020"]}
    assert classify_answer(gt, {"kind": "docs", "text": "", "doc_ids": ["CEN24LA020", "CEN24LA012"]}) == "Correct"
    assert classify_answer(gt, {"kind": "text", "text": "CEN24LA012, CEN24LA020"}) == "Correct"
    assert classify_answer(gt, {"kind": "text", "text": "CEN24LA012"}) == "Incorrect"


def test_classify_refusal_first():
    gt = {"answer_type": "scalar", "value": 21}
    answer = {"kind": "text", "text": "The NTSB does not assign fault or blame for accidents or incidents, so this question cannot be answered."}
    assert classify_answer(gt, answer) == "Refusal"


# -- frozen fixtures --------------------------------------------------------------

def test_committed_fixtures_match_regeneration(tmp_path):
    """Golden-plan files and planner fixtures must stay in sync with the
    prompts and generator. If this fails, rerun python3 -m docflow.bench.record_fixtures."""
    from docflow.bench import record_fixtures

    regenerated = record_fixtures.record(tmp_path)
    shipped = Path("src/docflow/bench/data")
    assert (tmp_path / "planner_fixtures.json").read_bytes() == (shipped / "planner_fixtures.json").read_bytes()
    for plan_file in sorted((tmp_path / "golden_plans").glob("*.json")):
        assert plan_file.read_bytes() == (shipped / "golden_plans" / plan_file.name).read_bytes(), plan_file.name
    assert regenerated["count"] == 30


# -- CLI ---------------------------------------------------------------------------

def test_cli_end_to_end(tmp_path, bench_corpus):
    runner = CliRunner()
    data_dir = str(tmp_path / "cli-data")

    result = runner.invoke(
        cli_main,
        ["ingest", "--input", str(bench_corpus / "docs"), "--index", BENCH_INDEX, "--schema",
         _write_schema_file(tmp_path), "--data-dir", data_dir],
    )
    assert result.exit_code == 0, result.output
    assert '"parents_written": 100' in result.output

    result = runner.invoke(
        cli_main,
        ["plan", "--query", "How many incidents occurred in 2023?", "--index", BENCH_INDEX,
         "--show-rewrites", "--dump-plan", str(tmp_path / "plan.json"), "--data-dir", data_dir],
    )
    assert result.exit_code == 0, result.output
    assert (tmp_path / "plan.json").exists()

    result = runner.invoke(
        cli_main,
        ["query", "--text", "How many incidents occurred at night?", "--index", BENCH_INDEX,
         "--dump-trace", str(tmp_path / "trace.json"), "--data-dir", data_dir],
    )
    assert result.exit_code == 0, result.output
    assert result.stdout.strip().splitlines()[0] == "18"
    trace = json.loads((tmp_path / "trace.json").read_text())
    assert trace["operators"]

    result = runner.invoke(
        cli_main,
        ["rag", "--question", "How many incidents were there in Hawaii?", "--index", BENCH_INDEX, "--data-dir", data_dir],
    )
    assert result.exit_code == 0, result.output
    assert result.stdout.strip().splitlines()[0] == "0"


def test_cli_bench_generate(tmp_path):
    runner = CliRunner()
    result = runner.invoke(cli_main, ["bench", "generate", "--out", str(tmp_path / "c"), "--n-docs", "10"])
    assert result.exit_code == 0, result.output
    assert len(list((tmp_path / "c" / "docs").glob("*.json"))) == 10


def _write_schema_file(tmp_path) -> str:
    from docflow.bench.questions import INGEST_FIELDS

    path = tmp_path / "schema.json"
    path.write_text(json.dumps({"fields": INGEST_FIELDS}))
    return str(path)
