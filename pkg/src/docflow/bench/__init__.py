from docflow.bench.corpus import BENCH_INDEX, Incident, SyntheticCorpusSpec, generate
from docflow.bench.harness import (
    REFUSAL_PHRASES,
    classify_answer,
    ensure_ingested,
    render_comparison_table,
    render_report_table,
    run_benchmark,
)
from docflow.bench.questions import INGEST_FIELDS, QUESTIONS, QUESTIONS_BY_ID, BenchmarkQuestion, ground_truth

__all__ = [
    "BENCH_INDEX",
    "BenchmarkQuestion",
    "INGEST_FIELDS",
    "Incident",
    "QUESTIONS",
    "QUESTIONS_BY_ID",
    "REFUSAL_PHRASES",
    "SyntheticCorpusSpec",
    "classify_answer",
    "ensure_ingested",
    "generate",
    "ground_truth",
    "render_comparison_table",
    "render_report_table",
    "run_benchmark",
]
