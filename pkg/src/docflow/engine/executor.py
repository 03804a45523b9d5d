"""Pipelined plan execution.

Documents stream through per-document operators without full buffering; only
barrier operators (grouping, sorting, clustering, generation, writes) hold
their input. Sources mark ingested roots; instrumented wrappers collect
counts, samples, and timings for the run trace.
"""

from __future__ import annotations

import itertools
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Optional

from docflow.checkpoint import MaterializeCheckpoint
from docflow.errors import DocflowError, ExecutionError
from docflow.llm.base import LlmClient, Transcript
from docflow.llm.embedding import Embedder
from docflow.model.document import Document
from docflow.ops.physical import PhysicalOperator, PhysicalPlan
from docflow.ops.runners import run_operator
from docflow.engine.trace import ExecutionTrace, TraceRecorder, finalize_trace, new_run_id
from docflow.store.index import IndexManager


class RunCounters:
    """Resident-document gauge: sources add, drops/sinks subtract."""

    def __init__(self) -> None:
        self.resident = 0
        self.peak_resident = 0
        self.source_emitted = 0
        self._lock = threading.Lock()

    def adjust(self, delta: int) -> None:
        with self._lock:
            self.resident += delta
            if self.resident > self.peak_resident:
                self.peak_resident = self.resident

    def source_yield(self) -> None:
        with self._lock:
            self.source_emitted += 1
            self.resident += 1
            if self.resident > self.peak_resident:
                self.peak_resident = self.resident

    def to_dict(self) -> dict:
        return {
            "source_emitted": self.source_emitted,
            "peak_resident_docs": self.peak_resident,
            "resident_at_end": self.resident,
        }


@dataclass
class RunContext:
    """Everything one execution needs; never shared between runs."""

    llm: LlmClient
    embedder: Embedder
    stores: IndexManager
    data_dir: Path
    run_id: str = field(default_factory=new_run_id)
    parallelism: int = 4
    generate_budget: int = 8000
    seed: int = 0
    trace: TraceRecorder = None  # type: ignore[assignment]
    counters: RunCounters = field(default_factory=RunCounters)
    last_write_report: Optional[dict] = None
    last_checkpoint: Optional[MaterializeCheckpoint] = None

    def __post_init__(self) -> None:
        if self.trace is None:
            self.trace = TraceRecorder(self.run_id)


@dataclass
class ExecutionResult:
    mode: str
    docs: Optional[list[Document]] = None
    count: Optional[int] = None
    report: Optional[dict] = None
    checkpoint: Optional[MaterializeCheckpoint] = None
    trace: ExecutionTrace = None  # type: ignore[assignment]

    @property
    def value(self) -> Any:
        if self.mode == "count":
            return self.count
        if self.mode == "write":
            return self.report
        return self.docs


class Executor:
    def __init__(self, ctx: RunContext) -> None:
        self.ctx = ctx

    def execute(self, plan: PhysicalPlan, mode: str = "collect", n: Optional[int] = None) -> ExecutionResult:
        if mode not in ("collect", "count", "take", "write"):
            raise DocflowError(f"unknown execution mode: {mode!r}")
        started = time.time()
        nodes = plan.nodes()  # validates acyclicity
        outputs: dict[int, Iterator[Document]] = {}

        for node in nodes:
            record = self.ctx.trace.register(node.op_id, node.op_kind)
            record.notes["_input_ops"] = [i.op_id for i in node.inputs]
            input_iters = [self._count_input(node, outputs[id(up)]) for up in node.inputs]
            raw = run_operator(node, input_iters, self.ctx)
            outputs[id(node)] = self._instrument(node, raw)

        result_iter = outputs[id(plan.result)]
        try:
            if mode == "count":
                total = 0
                for _ in result_iter:
                    total += 1
                    self.ctx.counters.adjust(-1)
                result = ExecutionResult(mode=mode, count=total)
            elif mode == "take":
                docs = list(itertools.islice(result_iter, n or 0))
                for _ in docs:
                    self.ctx.counters.adjust(-1)
                result = ExecutionResult(mode=mode, docs=docs)
            elif mode == "write":
                for _ in result_iter:
                    self.ctx.counters.adjust(-1)
                result = ExecutionResult(mode=mode, report=self.ctx.last_write_report)
            else:
                docs = list(result_iter)
                for _ in docs:
                    self.ctx.counters.adjust(-1)
                result = ExecutionResult(mode=mode, docs=docs)
        except Exception as exc:
            # preserve the partial trace on the error for debugging
            trace = self._finalize(started, {"mode": mode, "error": str(exc)})
            if isinstance(exc, ExecutionError):
                exc.trace = trace  # type: ignore[attr-defined]
                raise
            raise

        result.checkpoint = self.ctx.last_checkpoint
        summary: dict[str, Any] = {"mode": mode}
        if result.count is not None:
            summary["count"] = result.count
        if result.docs is not None:
            summary["doc_count"] = len(result.docs)
        if result.report is not None:
            summary["report"] = result.report
        result.trace = self._finalize(started, summary)
        return result

    def _finalize(self, started: float, summary: dict) -> ExecutionTrace:
        return finalize_trace(
            self.ctx.trace, self.ctx.llm.transcript, started, summary, self.ctx.counters.to_dict()
        )

    def _count_input(self, consumer: PhysicalOperator, upstream: Iterator[Document]) -> Iterator[Document]:
        record = self.ctx.trace.records[consumer.op_id]

        def gen() -> Iterator[Document]:
            for doc in upstream:
                record.input_count += 1
                yield doc

        return gen()

    def _instrument(self, node: PhysicalOperator, raw: Iterator[Document]) -> Iterator[Document]:
        record = self.ctx.trace.records[node.op_id]
        is_source = not node.inputs

        def gen() -> Iterator[Document]:
            while True:
                t0 = time.perf_counter()
                try:
                    doc = next(raw)
                except StopIteration:
                    record.gross_seconds += time.perf_counter() - t0
                    return
                except ExecutionError:
                    record.gross_seconds += time.perf_counter() - t0
                    raise
                except Exception as exc:
                    record.gross_seconds += time.perf_counter() - t0
                    raise ExecutionError(f"operator failed: {exc}", operator_id=node.op_id)
                record.gross_seconds += time.perf_counter() - t0
                record.output_count += 1
                self.ctx.trace.add_sample(node.op_id, doc)
                if is_source:
                    self.ctx.counters.source_yield()
                    self.ctx.trace.add_roots(doc.lineage if doc.lineage else {doc.doc_id})
                    if doc.lineage and doc.lineage != frozenset({doc.doc_id}):
                        self.ctx.trace.add_edges(doc.doc_id, sorted(doc.lineage))
                yield doc

        return gen()


def write_trace_file(trace: ExecutionTrace, trace_dir: Path) -> Path:
    trace_dir.mkdir(parents=True, exist_ok=True)
    path = trace_dir / f"{trace.run_id}.json"
    path.write_text(json.dumps(trace.to_dict(), indent=2, ensure_ascii=False), encoding="utf-8")
    return path
