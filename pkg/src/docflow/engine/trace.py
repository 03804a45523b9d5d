"""Execution traces: per-operator records, lineage edges, LLM transcripts."""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Any, Optional

from docflow.llm.base import Transcript
from docflow.model.document import Document

SAMPLE_CAP = 20


@dataclass
class OperatorRecord:
    op_id: str
    op_kind: str
    input_count: int = 0
    output_count: int = 0
    duration_ms: int = 0
    sample: list[dict] = field(default_factory=list)
    llm_entries: list[int] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)
    gross_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "op_id": self.op_id,
            "op_kind": self.op_kind,
            "input_count": self.input_count,
            "output_count": self.output_count,
            "duration_ms": self.duration_ms,
            "sample": self.sample,
            "llm_entries": self.llm_entries,
            "notes": self.notes,
        }


class TraceRecorder:
    """Per-run trace sink; safe for the engine's bounded worker threads."""

    def __init__(self, run_id: str) -> None:
        self.run_id = run_id
        self.records: dict[str, OperatorRecord] = {}
        self.order: list[str] = []
        self.edges: dict[str, list[str]] = {}
        self.roots: set[str] = set()
        self._lock = threading.Lock()

    def register(self, op_id: str, op_kind: str) -> OperatorRecord:
        with self._lock:
            if op_id not in self.records:
                self.records[op_id] = OperatorRecord(op_id, op_kind)
                self.order.append(op_id)
            return self.records[op_id]

    def add_sample(self, op_id: str, doc: Document) -> None:
        record = self.records[op_id]
        if len(record.sample) < SAMPLE_CAP:
            with self._lock:
                if len(record.sample) < SAMPLE_CAP:
                    record.sample.append(_sample_view(doc))

    def add_edges(self, out_id: str, in_ids: list[str]) -> None:
        with self._lock:
            existing = self.edges.setdefault(out_id, [])
            for i in in_ids:
                if i != out_id and i not in existing:
                    existing.append(i)

    def add_roots(self, ids) -> None:
        with self._lock:
            self.roots.update(ids)

    def note(self, op_id: str, key: str, value: Any) -> None:
        with self._lock:
            self.records[op_id].notes[key] = value

    def incr(self, op_id: str, key: str, delta: int = 1) -> None:
        with self._lock:
            notes = self.records[op_id].notes
            notes[key] = notes.get(key, 0) + delta

    def sample_note(self, op_id: str, key: str, value: Any) -> None:
        with self._lock:
            bucket = self.records[op_id].notes.setdefault(key, [])
            if len(bucket) < SAMPLE_CAP:
                bucket.append(value)

    def reaches_root(self, doc_id: str) -> bool:
        seen: set[str] = set()
        stack = [doc_id]
        while stack:
            current = stack.pop()
            if current in self.roots:
                return True
            if current in seen:
                continue
            seen.add(current)
            stack.extend(self.edges.get(current, ()))
        return False


def _sample_view(doc: Document) -> dict:
    view = doc.to_dict()
    content = view.get("content")
    if isinstance(content, dict) and isinstance(content.get("text"), str) and len(content["text"]) > 2000:
        content["text"] = content["text"][:2000] + "…"
    view.pop("embedding", None)
    view["children"] = f"<{len(doc.children)} elements>" if doc.children else []
    return view


@dataclass
class ExecutionTrace:
    run_id: str
    started_at: float
    finished_at: float
    records: list[OperatorRecord]
    edges: dict[str, list[str]]
    roots: list[str]
    transcript: list[dict]
    result_summary: dict
    counters: dict

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "operators": [r.to_dict() for r in self.records],
            "lineage_edges": self.edges,
            "roots": sorted(self.roots),
            "llm_transcript": self.transcript,
            "result": self.result_summary,
            "counters": self.counters,
        }

    def record_for(self, op_id: str) -> Optional[OperatorRecord]:
        for r in self.records:
            if r.op_id == op_id:
                return r
        return None

    def reaches_root(self, doc_id: str) -> bool:
        if doc_id in self.roots:
            return True
        seen: set[str] = set()
        stack = [doc_id]
        roots = set(self.roots)
        while stack:
            current = stack.pop()
            if current in roots:
                return True
            if current in seen:
                continue
            seen.add(current)
            stack.extend(self.edges.get(current, ()))
        return False


def finalize_trace(
    recorder: TraceRecorder,
    transcript: Transcript,
    started_at: float,
    result_summary: dict,
    counters: dict,
) -> ExecutionTrace:
    # attach transcript entry indices to the operators that made the calls
    by_tag: dict[str, list[int]] = {}
    entries = transcript.entries()
    for e in entries:
        if e.tag:
            by_tag.setdefault(e.tag, []).append(e.call_index)
    for op_id, record in recorder.records.items():
        record.llm_entries = by_tag.get(op_id, [])
        record.duration_ms = max(
            0,
            int((record.gross_seconds - sum(recorder.records[i].gross_seconds for i in _inputs_of(recorder, op_id))) * 1000),
        )
    return ExecutionTrace(
        run_id=recorder.run_id,
        started_at=started_at,
        finished_at=time.time(),
        records=[recorder.records[i] for i in recorder.order],
        edges=dict(recorder.edges),
        roots=sorted(recorder.roots),
        transcript=[e.to_dict() for e in entries],
        result_summary=result_summary,
        counters=counters,
    )


def _inputs_of(recorder: TraceRecorder, op_id: str) -> list[str]:
    record = recorder.records.get(op_id)
    if record is None:
        return []
    return record.notes.get("_input_ops", [])


def new_run_id() -> str:
    return uuid.uuid4().hex[:16]
