import json

import pytest

from docflow.checkpoint import read_checkpoint, write_documents
from docflow.errors import ExecutionError, IntegrityError
from docflow.model import Document, Element
from docflow.bench.questions import INGEST_FIELDS


def _docs(count):
    return [
        Document(
            doc_id=f"d{i}",
            content=f"report {i}",
            children=[Element("e0000", "text", text_representation=f"report {i}")],
            properties={"n": i},
            lineage=frozenset({f"d{i}"}),
        )
        for i in range(count)
    ]


def test_docsets_are_lazy(ctx):
    calls = []

    def spy(doc):
        calls.append(doc.doc_id)
        return doc

    ds = ctx.docset_from(_docs(5)).map(spy)
    assert calls == []  # nothing ran yet
    ds.count()
    assert len(calls) == 5
    ds.count()  # original DocSet still valid and re-runnable
    assert len(calls) == 10


def test_count_and_take(ctx):
    ds = ctx.docset_from(_docs(100))
    assert ds.count() == 100
    assert ds.take(0) == []
    assert [d.doc_id for d in ds.take(3)] == ["d0", "d1", "d2"]


def test_ingest_pipeline_trace_has_four_records(ctx, tmp_path, bench_corpus):
    # partition → llmExtract → explode → embed over a three-document fixture
    src = tmp_path / "three"
    src.mkdir()
    for path in sorted((bench_corpus / "docs").glob("*.json"))[:3]:
        (src / path.name).write_bytes(path.read_bytes())
    ds = (
        ctx.read_docparse(src)
        .llm_extract([{"name": "us_state", "dtype": "string"}])
        .explode()
        .embed()
    )
    result = ds.execute("collect")
    records = result.trace.records
    assert [r.op_kind for r in records] == ["partition", "llmExtract", "explode", "embed"]
    assert records[0].output_count == 3
    assert records[1].input_count == 3 and records[1].output_count == 3
    n_elements = sum(len(json.loads(p.read_text())["elements"]) for p in src.glob("*.json"))
    assert records[2].output_count == 3 + n_elements
    assert records[3].input_count == records[2].output_count == records[3].output_count


def test_rerun_is_deterministic(ctx):
    docs = _docs(20)
    ds = ctx.docset_from(docs).filter(expression={"op": ">", "args": [{"field": "n"}, {"const": 4}]})
    first = ds.execute("collect")
    second = ds.execute("collect")
    assert [d.doc_id for d in first.docs] == [d.doc_id for d in second.docs]
    counts_a = [(r.op_kind, r.input_count, r.output_count) for r in first.trace.records]
    counts_b = [(r.op_kind, r.input_count, r.output_count) for r in second.trace.records]
    assert counts_a == counts_b


def test_streaming_chain_keeps_resident_docs_bounded(ctx):
    docs = _docs(500)
    ds = ctx.docset_from(docs).map(lambda d: d).map(lambda d: d).filter(lambda d: True)
    result = ds.execute("count")
    peak = result.trace.counters["peak_resident_docs"]
    assert result.count == 500
    assert peak <= 8 * ctx.parallelism + 16, f"streaming chain buffered {peak} documents"


def test_barrier_operator_buffers_input(ctx):
    docs = _docs(500)
    result = ctx.docset_from(docs).reduce_by_key(["n"], "count").execute("count")
    assert result.trace.counters["peak_resident_docs"] >= 500


def test_trace_lineage_closure(ctx):
    docs = _docs(10)
    result = ctx.docset_from(docs).reduce_by_key([], "count").execute("collect")
    for doc in result.docs:
        assert result.trace.reaches_root(doc.doc_id), doc.doc_id


def test_operator_failure_names_operator_and_preserves_trace(ctx):
    def boom(doc):
        if doc.properties["n"] == 3:
            raise RuntimeError("bad doc")
        return doc

    ds = ctx.docset_from(_docs(5)).map(boom)
    with pytest.raises(ExecutionError) as err:
        ds.collect()
    assert err.value.operator_id
    assert err.value.doc_id == "d3"
    trace = getattr(err.value, "trace", None)
    assert trace is not None and trace.records  # partial trace preserved


# -- checkpoints ---------------------------------------------------------------

def test_materialize_then_resume_equals_direct(ctx):
    docs = _docs(25)
    direct = ctx.docset_from(docs).filter(expression={"op": ">", "args": [{"field": "n"}, {"const": 10}]})
    checkpoint = ctx.docset_from(docs).materialize("mid", target="disk")
    resumed = ctx.resume_from(checkpoint).filter(expression={"op": ">", "args": [{"field": "n"}, {"const": 10}]})
    assert [d.to_dict() for d in resumed.collect()] == [d.to_dict() for d in direct.collect()]


def test_resume_survives_source_deletion(ctx, tmp_path, bench_corpus):
    src = tmp_path / "vanishing"
    src.mkdir()
    for path in sorted((bench_corpus / "docs").glob("*.json"))[:4]:
        (src / path.name).write_bytes(path.read_bytes())
    checkpoint = ctx.read_docparse(src).materialize("ingested", target="disk")
    for p in src.glob("*.json"):
        p.unlink()
    resumed = ctx.resume_from(checkpoint)
    assert resumed.count() == 4


def test_tampered_checkpoint_raises_integrity_error(ctx, tmp_path):
    checkpoint = write_documents(_docs(8), "tamper", "disk", str(ctx.data_dir))
    segment = next((ctx.data_dir / "checkpoints" / "tamper").glob("docs-*.jsonl"))
    raw = bytearray(segment.read_bytes())
    raw[10] ^= 0x01
    segment.write_bytes(bytes(raw))
    with pytest.raises(IntegrityError):
        list(read_checkpoint(checkpoint.uri))


def test_memory_checkpoint_round_trip(ctx):
    docs = _docs(6)
    checkpoint = write_documents(docs, "in-memory-test", "memory", str(ctx.data_dir))
    assert checkpoint.count == 6
    assert [d.to_dict() for d in read_checkpoint(checkpoint.uri)] == [d.to_dict() for d in docs]


def test_checkpoint_mid_pipeline_equivalence(bench_context, bench_index):
    # materializing any node must not change downstream results
    from docflow.bench.corpus import BENCH_INDEX

    plain = (
        bench_context.query_index(BENCH_INDEX, filters=[{"field": "aircraftManufacturer", "op": "eq", "value": "Piper"}])
        .llm_extract([{"name": "damaged_part", "dtype": "string"}])
        .collect()
    )
    checkpoint = bench_context.query_index(
        BENCH_INDEX, filters=[{"field": "aircraftManufacturer", "op": "eq", "value": "Piper"}]
    ).materialize("piper-scan", target="memory")
    resumed = (
        bench_context.resume_from(checkpoint)
        .llm_extract([{"name": "damaged_part", "dtype": "string"}])
        .collect()
    )
    assert [d.to_dict() for d in resumed] == [d.to_dict() for d in plain]
