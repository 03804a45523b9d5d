"""Benchmark runner: drives the NL-analytics path or the RAG baseline through
the REST API and scores answers against ground truth.

Verdicts: exact match for scalars (1e-9 for floats) and text, order-insensitive
set match for tables (projected onto the ground-truth columns) and doc-lists.
Refusals are detected first, by a configurable phrase list.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any, Optional, Sequence

from docflow.bench.corpus import BENCH_INDEX
from docflow.bench.questions import INGEST_FIELDS, QUESTIONS, QUESTIONS_BY_ID, BenchmarkQuestion

REFUSAL_PHRASES = (
    "does not assign fault or blame",
    "cannot be answered",
    "unable to answer",
    "i cannot answer",
)

_ACCIDENT_ID = re.compile(r"\b[A-Z]{3}\d{2}LA\d{3}\b")


def _numeric(value: Any) -> Optional[float]:
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value.strip())
        except ValueError:
            return None
    return None


def _scalar_equal(actual: Any, expected: Any) -> bool:
    a, e = _numeric(actual), _numeric(expected)
    if a is not None and e is not None:
        return abs(a - e) < 1e-9
    return str(actual).strip() == str(expected).strip()


def _norm_cell(value: Any) -> Any:
    n = _numeric(value)
    if n is not None:
        return round(n, 9)
    return str(value).strip()


def _table_equal(rows: list[dict], expected: list[list], columns: Sequence[str]) -> bool:
    actual = {tuple(_norm_cell(r.get(c)) for c in columns) for r in rows}
    wanted = {tuple(_norm_cell(v) for v in row) for row in expected}
    return actual == wanted


def classify_answer(gt_entry: dict, answer: dict, refusal_phrases: Sequence[str] = REFUSAL_PHRASES) -> str:
    text = (answer.get("text") or "").lower()
    if any(phrase in text for phrase in refusal_phrases):
        return "Refusal"
    answer_type = gt_entry["answer_type"]
    expected = gt_entry["value"]
    if answer_type == "scalar":
        actual = answer.get("scalar")
        if actual is None:
            actual = answer.get("text", "")
        return "Correct" if _scalar_equal(actual, expected) else "Incorrect"
    if answer_type == "text":
        return "Correct" if str(answer.get("text", "")).strip() == str(expected).strip() else "Incorrect"
    if answer_type == "doc-list":
        ids = answer.get("doc_ids")
        if ids is None:
            ids = _ACCIDENT_ID.findall(answer.get("text", ""))
        return "Correct" if set(ids) == set(expected) else "Incorrect"
    if answer_type == "table":
        rows = answer.get("rows")
        if rows is None:
            return "Incorrect"
        columns = gt_entry.get("columns") or []
        return "Correct" if _table_equal(rows, expected, columns) else "Incorrect"
    return "Incorrect"


def load_ground_truth(corpus_dir: str | Path) -> dict:
    return json.loads((Path(corpus_dir) / "ground_truth.json").read_text(encoding="utf-8"))


def ensure_ingested(client, corpus_dir: str | Path, index_name: str = BENCH_INDEX) -> None:
    existing = client.get("/indexes").json()["indexes"]
    if index_name in existing:
        return
    resp = client.post(
        f"/indexes/{index_name}/ingest",
        json={"input_dir": str(Path(corpus_dir) / "docs"), "extract_fields": INGEST_FIELDS},
    )
    resp.raise_for_status()


def run_benchmark(
    client,
    corpus_dir: str | Path,
    engine: str = "luna",
    index_name: str = BENCH_INDEX,
    k: int = 100,
    question_ids: Optional[Sequence[str]] = None,
    refusal_phrases: Sequence[str] = REFUSAL_PHRASES,
) -> dict:
    """Run the benchmark through a REST client. `engine` is "luna" or "rag"."""
    if engine not in ("luna", "rag"):
        raise ValueError(f"unknown engine {engine!r}")
    truth = load_ground_truth(corpus_dir)["questions"]
    ensure_ingested(client, corpus_dir, index_name)
    questions = [QUESTIONS_BY_ID[qid] for qid in question_ids] if question_ids else QUESTIONS

    per_question = []
    for q in questions:
        entry = truth[q.id]
        record: dict[str, Any] = {"id": q.id, "text": q.text, "category": q.category, "answer_type": q.answer_type}
        try:
            if engine == "luna":
                answer, extra = _run_luna_question(client, q, index_name)
            else:
                answer, extra = _run_rag_question(client, q, index_name, k)
            record.update(extra)
            record["answer_text"] = answer.get("text")
            record["verdict"] = classify_answer(entry, answer, refusal_phrases)
        except Exception as exc:  # engine failure counts as Incorrect, with the error noted
            record["verdict"] = "Incorrect"
            record["error"] = str(exc)
        record["expected"] = entry["value"]
        per_question.append(record)

    totals = {"Correct": 0, "Incorrect": 0, "Refusal": 0}
    for r in per_question:
        totals[r["verdict"]] += 1
    return {
        "engine": engine,
        "index": index_name,
        "k": k if engine == "rag" else None,
        "totals": totals,
        "per_question": per_question,
    }


def _run_luna_question(client, q: BenchmarkQuestion, index_name: str) -> tuple[dict, dict]:
    resp = client.post("/sessions", json={"index_name": index_name})
    resp.raise_for_status()
    session_id = resp.json()["session_id"]
    for setup_id in q.setup:
        setup_q = QUESTIONS_BY_ID[setup_id]
        r = client.post(f"/sessions/{session_id}/query", json={"text": setup_q.text})
        r.raise_for_status()
    resp = client.post(f"/sessions/{session_id}/query", json={"text": q.text})
    resp.raise_for_status()
    body = resp.json()
    return body["answer"], {"session_id": session_id, "trace_id": body.get("trace_id")}


def _run_rag_question(client, q: BenchmarkQuestion, index_name: str, k: int) -> tuple[dict, dict]:
    resp = client.post("/rag", json={"question": q.text, "k": k, "index_name": index_name})
    resp.raise_for_status()
    body = resp.json()
    answer = {"kind": "text", "text": body["answer"]}
    return answer, {"retrieved_doc_ids": body.get("retrieved_doc_ids", [])[:10]}


def render_report_table(report: dict) -> str:
    totals = report["totals"]
    n = sum(totals.values()) or 1
    lines = [
        f"engine: {report['engine']}" + (f" (k={report['k']})" if report.get("k") else ""),
        "+-----------+-------+--------+",
        "| verdict   | count |      % |",
        "+-----------+-------+--------+",
    ]
    for verdict in ("Correct", "Incorrect", "Refusal"):
        lines.append(f"| {verdict:<9} | {totals[verdict]:>5} | {100.0 * totals[verdict] / n:>5.1f}% |")
    lines.append("+-----------+-------+--------+")
    lines.append(f"| Total     | {n:>5} |        |")
    lines.append("+-----------+-------+--------+")
    return "\n".join(lines)


def render_comparison_table(luna_report: dict, rag_report: dict) -> str:
    lt, rt = luna_report["totals"], rag_report["totals"]
    n = sum(lt.values()) or 1
    lines = [
        "+-----------+---------------+---------------+",
        "| verdict   | nl-analytics  | rag baseline  |",
        "+-----------+---------------+---------------+",
    ]
    for verdict in ("Correct", "Incorrect", "Refusal"):
        left = f"{lt[verdict]} ({100.0 * lt[verdict] / n:.1f}%)"
        right = f"{rt[verdict]} ({100.0 * rt[verdict] / n:.1f}%)"
        lines.append(f"| {verdict:<9} | {left:>13} | {right:>13} |")
    lines.append("+-----------+---------------+---------------+")
    return "\n".join(lines)
