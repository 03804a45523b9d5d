"""Physical operator implementations.

Each runner turns input document iterators into an output iterator. Per-document
operators may compute in parallel (bounded width) but always emit in input
order; barrier operators consume their input fully before emitting.

Runners report lineage edges and notes through the run context's trace
recorder, and resident-document deltas through its counters, so the engine can
expose pipelining behavior and provenance.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import TYPE_CHECKING, Any, Callable, Iterator, Optional

import numpy as np

from docflow.checkpoint import CheckpointWriter, read_checkpoint, resolve_target_uri
from docflow.errors import (
    AggregationError,
    DocflowError,
    ExecutionError,
    LlmValidationError,
    ProviderError,
)
from docflow.llm.base import LlmRequest, extract_json_payload
from docflow.llm.embedding import tokenize
from docflow.model.docparse import parse_docparse_json
from docflow.model.document import Document, canonical_json
from docflow.ops import prompts
from docflow.ops.cluster import kmeans_cosine
from docflow.ops.expressions import evaluate, resolve_path
from docflow.ops.parallel import ordered_parallel_map
from docflow.ops.physical import PhysicalOperator, coerce_value

if TYPE_CHECKING:
    from docflow.engine.executor import RunContext

Stream = Iterator[Document]

EXTRACT_RESPONSE_SCHEMA = {"type": "object"}


def properties_text(doc: Document) -> str:
    """Context text for a document: its content, else its properties as JSON."""
    if doc.text_representation is not None and doc.text_representation != "":
        return doc.text_representation
    public = {k: v for k, v in doc.properties.items() if not k.startswith("_")}
    return canonical_json(public).decode("utf-8")


def _fill(template: str, **values: str) -> str:
    # str.replace, not str.format: document text may contain braces
    out = template
    for key, value in values.items():
        out = out.replace("{" + key + "}", value)
    return out


# ---------------------------------------------------------------------------
# structured operators
# ---------------------------------------------------------------------------

def run_map(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    fn: Callable[[Document], Document] = op.params["fn"]

    def work(doc: Document) -> Document:
        try:
            result = fn(doc)
        except Exception as exc:
            raise ExecutionError(f"map function raised: {exc}", operator_id=op.op_id, doc_id=doc.doc_id)
        if not result.lineage:
            result = result.evolve(lineage=doc.lineage)
        return result

    for out in ordered_parallel_map(source, work, ctx.parallelism):
        yield out


def run_filter(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    expression = op.params.get("expression")
    fn = op.params.get("fn")
    for doc in source:
        try:
            keep = bool(evaluate(expression, doc.properties)) if expression is not None else bool(fn(doc))
        except Exception as exc:
            raise ExecutionError(f"filter raised: {exc}", operator_id=op.op_id, doc_id=doc.doc_id)
        if keep:
            yield doc
        else:
            ctx.counters.adjust(-1)


def run_flat_map(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    fn = op.params["fn"]
    for doc in source:
        try:
            results = list(fn(doc))
        except Exception as exc:
            raise ExecutionError(f"flatMap function raised: {exc}", operator_id=op.op_id, doc_id=doc.doc_id)
        ctx.counters.adjust(len(results) - 1)
        for out in results:
            if not out.lineage:
                out = out.evolve(lineage=doc.lineage)
            if out.doc_id != doc.doc_id:
                ctx.trace.add_edges(out.doc_id, [doc.doc_id])
            yield out


def run_explode(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    for doc in source:
        ctx.counters.adjust(len(doc.children))
        yield doc.evolve(children=[])
        for i, element in enumerate(doc.children):
            child = Document(
                doc_id=f"{doc.doc_id}#{element.element_id}",
                content=element.text_representation,
                children=[element],
                properties={
                    **doc.properties,
                    **element.properties,
                    "parent_id": doc.doc_id,
                    "_ordinal": i,
                },
                lineage=doc.lineage,
            )
            ctx.trace.add_edges(child.doc_id, [doc.doc_id])
            yield child


def _group_sort_key(key_tuple: tuple) -> tuple:
    # natural per-component ordering (None first, then by type rank), so
    # numeric keys sort numerically rather than by their JSON spelling
    return tuple(_sort_value(v) for v in key_tuple)


def _resolve_keys(doc: Document, keys: list[str]) -> tuple:
    return tuple(resolve_path(doc.properties, k) for k in keys)


def run_reduce_by_key(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    keys: list[str] = op.params["keys"]
    agg: str = op.params["agg"]
    agg_field: Optional[str] = op.params.get("agg_field")
    output_field = op.params.get("output_field") or ("collected" if agg == "collect" else agg)

    groups: dict[tuple, list[Document]] = {}
    consumed = 0
    for doc in source:
        consumed += 1
        groups.setdefault(_resolve_keys(doc, keys), []).append(doc)

    ordered = sorted(groups.items(), key=lambda kv: _group_sort_key(kv[0]))
    ctx.counters.adjust(len(ordered) - consumed)
    for key_tuple, members in ordered:
        value = _aggregate(op, agg, agg_field, members)
        props = {k.split(".")[-1]: v for k, v in zip(keys, key_tuple)}
        props[output_field] = value
        key_map = {k: v for k, v in zip(keys, key_tuple)}
        out = Document(
            doc_id=f"group:{canonical_json(key_map).decode('utf-8')}",
            content=canonical_json(props).decode("utf-8"),
            properties=props,
            lineage=frozenset().union(*(m.lineage for m in members)),
        )
        ctx.trace.add_edges(out.doc_id, [m.doc_id for m in members])
        yield out


def _aggregate(op: PhysicalOperator, agg: str, agg_field: Optional[str], members: list[Document]) -> Any:
    if agg == "count":
        return len(members)
    if agg == "collect":
        return [{k: v for k, v in m.properties.items() if not k.startswith("_")} for m in members]
    values: list[tuple[Any, str]] = []
    for m in members:
        v = resolve_path(m.properties, agg_field or "")
        if v is None:
            continue  # aggregates ignore missing values, like SQL NULL
        if agg in ("sum", "avg") and (isinstance(v, bool) or not isinstance(v, (int, float))):
            raise AggregationError(
                f"{agg}({agg_field}) over non-numeric value {v!r}",
                operator_id=op.op_id,
                doc_id=m.doc_id,
            )
        values.append((v, m.doc_id))
    if not values:
        return None
    raw = [v for v, _ in values]
    if agg == "sum":
        return sum(raw)
    if agg == "avg":
        return sum(raw) / len(raw)
    try:
        return min(raw) if agg == "min" else max(raw)
    except TypeError:
        raise AggregationError(
            f"{agg}({agg_field}) over incomparable values",
            operator_id=op.op_id,
            doc_id=values[0][1],
        )


_TYPE_RANK = {bool: 0, int: 1, float: 1, str: 2}


def _sort_value(value: Any) -> tuple:
    if value is None:
        return (0, 0, "")
    rank = _TYPE_RANK.get(type(value), 3)
    if rank == 3:
        return (1, 3, canonical_json(value).decode("utf-8"))
    return (1, rank, value)


def run_sort(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    field = op.params["field"]
    descending = bool(op.params.get("descending"))
    docs = list(source)
    docs.sort(key=lambda d: _sort_value(resolve_path(d.properties, field)), reverse=descending)
    for doc in docs:
        yield doc


def run_take(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    n = op.params["n"]
    for i, doc in enumerate(source):
        if i >= n:
            break
        yield doc


def run_count(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    ids: list[str] = []
    lineage: set[str] = set()
    for doc in source:
        ids.append(doc.doc_id)
        lineage.update(doc.lineage)
    ctx.counters.adjust(1 - len(ids))
    props = {"count": len(ids)}
    out = Document(
        doc_id=f"count:{op.op_id}",
        content=canonical_json(props).decode("utf-8"),
        properties=props,
        lineage=frozenset(lineage) if lineage else frozenset({f"count:{op.op_id}"}),
    )
    if ids:
        ctx.trace.add_edges(out.doc_id, ids)
    yield out


# ---------------------------------------------------------------------------
# semantic operators
# ---------------------------------------------------------------------------

def run_llm_extract(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    fields: list[dict] = op.params["fields"]
    template = op.params.get("prompt") or prompts.EXTRACT_USER
    rendered_fields = prompts.render_fields(
        [{"name": f["name"], "dtype": f.get("dtype", "string"), "description": f.get("description", "")} for f in fields]
    )

    def work(doc: Document) -> Document:
        props = dict(doc.properties)
        text = doc.text_representation
        if text is None or not text.strip():
            props["_extract_failed"] = "document has no text representation"
            return doc.evolve(properties=props)
        request = LlmRequest(
            purpose="extract",
            system_prompt=prompts.EXTRACT_SYSTEM,
            user_prompt=_fill(template, fields=rendered_fields, document=text),
            response_format="json-with-schema",
            json_schema=EXTRACT_RESPONSE_SCHEMA,
        )
        try:
            payload = extract_json_payload(ctx.llm.complete(request, tag=op.op_id))
        except LlmValidationError as exc:
            props["_extract_failed"] = f"invalid response after retries: {exc.errors[-1] if exc.errors else exc}"
            ctx.trace.incr(op.op_id, "extract_failures")
            return doc.evolve(properties=props)
        errors: dict[str, str] = {}
        for f in fields:
            name = f["name"]
            if name not in payload:
                continue
            try:
                props[name] = coerce_value(payload[name], f.get("dtype", "string"))
            except ValueError as exc:
                errors[name] = str(exc)
        if errors:
            props["_extract_errors"] = {**props.get("_extract_errors", {}), **errors}
            ctx.trace.incr(op.op_id, "coercion_failures")
        return doc.evolve(properties=props)

    for out in ordered_parallel_map(source, work, ctx.parallelism):
        yield out


def run_llm_filter(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    question: str = op.params["question"]

    def verdict(doc: Document) -> tuple[Document, Optional[bool]]:
        text = doc.text_representation or properties_text(doc)
        user = _fill(prompts.FILTER_USER, question=question, document=text)
        for _ in range(ctx.llm.retry_bound):
            response = ctx.llm.complete(
                LlmRequest("filter", prompts.FILTER_SYSTEM, user), tag=op.op_id
            )
            normalized = response.strip().lower().rstrip(".")
            if normalized in ("true", "false"):
                return doc, normalized == "true"
            user = user + "\n\nRespond with exactly one word: true or false."
        return doc, None

    for doc, keep in ordered_parallel_map(source, verdict, ctx.parallelism):
        if keep is True:
            ctx.trace.sample_note(op.op_id, "verdicts", {"doc_id": doc.doc_id, "verdict": True})
            yield doc
        elif keep is False:
            ctx.trace.sample_note(op.op_id, "verdicts", {"doc_id": doc.doc_id, "verdict": False})
            ctx.counters.adjust(-1)
        else:
            # unparseable after retries: drop, surface in trace
            ctx.trace.incr(op.op_id, "unparseable_dropped")
            ctx.trace.sample_note(op.op_id, "verdicts", {"doc_id": doc.doc_id, "verdict": None})
            ctx.counters.adjust(-1)


def run_llm_reduce_by_key(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    keys: list[str] = op.params["keys"]
    instructions: str = op.params["prompt"]
    batch_size: int = op.params.get("batch_size") or 8
    budget: int = op.params.get("budget_tokens") or ctx.generate_budget

    groups: dict[tuple, list[Document]] = {}
    consumed = 0
    for doc in source:
        consumed += 1
        groups.setdefault(_resolve_keys(doc, keys), []).append(doc)

    def combine(texts: list[str], labels: list[str]) -> str:
        rendered = "\n".join(prompts.render_context_entry(lbl, txt) for lbl, txt in zip(labels, texts))
        request = LlmRequest(
            purpose="reduce",
            system_prompt=prompts.REDUCE_SYSTEM,
            user_prompt=_fill(prompts.REDUCE_USER, instructions=instructions, documents=rendered),
        )
        return ctx.llm.complete(request, tag=op.op_id)

    ordered = sorted(groups.items(), key=lambda kv: _group_sort_key(kv[0]))
    ctx.counters.adjust(len(ordered) - consumed)
    for key_tuple, members in ordered:
        texts = [properties_text(m) for m in members]
        labels = [m.doc_id for m in members]
        key_map = {k: v for k, v in zip(keys, key_tuple)}
        try:
            # hierarchical fold whenever the flat pack would blow the budget
            while len(texts) > 1 and sum(len(tokenize(t)) for t in texts) > budget:
                folded_texts, folded_labels = [], []
                for i in range(0, len(texts), batch_size):
                    folded_texts.append(combine(texts[i : i + batch_size], labels[i : i + batch_size]))
                    folded_labels.append(f"batch-{i // batch_size}")
                texts, labels = folded_texts, folded_labels
            combined = combine(texts, labels)
        except (ProviderError, LlmValidationError) as exc:
            raise ExecutionError(
                f"llmReduceByKey failed for key {key_map!r}: {exc}", operator_id=op.op_id
            )
        props = {k.split(".")[-1]: v for k, v in zip(keys, key_tuple)}
        out = Document(
            doc_id=f"reduce:{canonical_json(key_map).decode('utf-8')}",
            content=combined,
            properties=props,
            lineage=frozenset().union(*(m.lineage for m in members)),
        )
        ctx.trace.add_edges(out.doc_id, [m.doc_id for m in members])
        yield out


def run_embed(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    field = op.params.get("field")

    def work(doc: Document) -> Document:
        text = resolve_path(doc.properties, field) if field else doc.text_representation
        if not isinstance(text, str) or not text.strip():
            if op.params.get("skip_empty", True):
                return doc
            raise ExecutionError("cannot embed empty text", operator_id=op.op_id, doc_id=doc.doc_id)
        vector = ctx.embedder.embed(text)
        return doc.evolve(embedding=list(vector.values))

    for out in ordered_parallel_map(source, work, ctx.parallelism):
        yield out


def run_kmeans_cluster(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    k: int = op.params["k"]
    field: str = op.params["field"]
    use_existing = bool(op.params.get("use_existing_embeddings"))
    docs = list(source)
    if len(docs) < k:
        raise ExecutionError(f"need at least k={k} documents, got {len(docs)}", operator_id=op.op_id)
    vectors = []
    for doc in docs:
        if use_existing and doc.embedding is not None:
            vectors.append(doc.embedding)
            continue
        text = resolve_path(doc.properties, field)
        if not isinstance(text, str) or not text.strip():
            raise ExecutionError(
                f"field {field!r} missing or empty; cannot cluster", operator_id=op.op_id, doc_id=doc.doc_id
            )
        vectors.append(list(ctx.embedder.embed(text).values))
    labels = kmeans_cosine(np.asarray(vectors), k, seed=op.params.get("seed", ctx.seed))
    for doc, label in zip(docs, labels):
        yield doc.evolve(properties={**doc.properties, "cluster_id": int(label)})


def run_summarize_generate(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    question: str = op.params["question"]
    budget: int = op.params.get("budget_tokens") or ctx.generate_budget

    included: list[Document] = []
    entries: list[str] = []
    used = 0
    truncated = 0
    consumed = 0
    for doc in source:
        consumed += 1
        text = properties_text(doc)
        cost = len(tokenize(text)) + 1
        if used + cost <= budget:
            included.append(doc)
            entries.append(prompts.render_context_entry(doc.doc_id, text))
            used += cost
        else:
            truncated += 1
    ctx.trace.note(op.op_id, "included_docs", len(included))
    ctx.trace.note(op.op_id, "truncated_docs", truncated)

    request = LlmRequest(
        purpose="generate",
        system_prompt=prompts.GENERATE_SYSTEM,
        user_prompt=_fill(prompts.GENERATE_USER, question=question, context="\n".join(entries) or "(no documents)"),
    )
    answer = ctx.llm.complete(request, tag=op.op_id)
    ctx.counters.adjust(1 - consumed)
    lineage = frozenset().union(*(d.lineage for d in included)) if included else frozenset({f"generate:{op.op_id}"})
    out = Document(
        doc_id=f"generate:{op.op_id}",
        content=answer,
        properties={"included_count": len(included), "truncated_count": truncated},
        lineage=lineage,
    )
    if included:
        ctx.trace.add_edges(out.doc_id, [d.doc_id for d in included])
    yield out


# ---------------------------------------------------------------------------
# sources and sinks
# ---------------------------------------------------------------------------

def run_partition(op: PhysicalOperator, ctx: "RunContext") -> Stream:
    paths: list[Path]
    if op.params.get("paths"):
        paths = [Path(p) for p in op.params["paths"]]
    else:
        root = Path(op.params["input_dir"])
        if not root.is_dir():
            raise ExecutionError(f"input directory not found: {root}", operator_id=op.op_id)
        paths = sorted(p for p in root.iterdir() if p.suffix == ".json")
    id_from = op.params.get("doc_id_from", "filename")
    for path in paths:
        doc_id = path.stem if id_from == "filename" else None
        try:
            doc = parse_docparse_json(path.read_bytes(), doc_id=doc_id)
        except DocflowError as exc:
            raise ExecutionError(f"failed to parse {path.name}: {exc}", operator_id=op.op_id)
        yield doc


def run_query_database(op: PhysicalOperator, ctx: "RunContext") -> Stream:
    index = ctx.stores.open(op.params["index"])
    if not index.exists():
        raise ExecutionError(f"index {op.params['index']!r} does not exist", operator_id=op.op_id)
    docs = index.query(
        filters=op.params.get("filters"),
        keyword=op.params.get("keyword"),
        limit=op.params.get("limit"),
    )
    for doc in docs:
        yield doc


def run_query_vector_database(op: PhysicalOperator, ctx: "RunContext") -> Stream:
    index = ctx.stores.open(op.params["index"])
    if not index.exists():
        raise ExecutionError(f"index {op.params['index']!r} does not exist", operator_id=op.op_id)
    for doc, score in index.vector_query(op.params["query_text"], op.params["k"], op.params.get("filters")):
        yield doc.evolve(properties={**doc.properties, "_retrieval_score": score})


def run_materialize(op: PhysicalOperator, inputs: list[Stream], ctx: "RunContext") -> Stream:
    name = op.params["name"]
    target = op.params.get("target", "disk")
    if op.params.get("read"):
        for doc in read_checkpoint(op.params.get("uri") or resolve_target_uri(name, target, str(ctx.data_dir))):
            yield doc
        return
    writer = CheckpointWriter(name, target, str(ctx.data_dir), op.op_id, ctx.run_id)
    for doc in inputs[0]:
        writer.add(doc)
        yield doc
    checkpoint = writer.finalize()
    ctx.trace.note(op.op_id, "checkpoint", checkpoint.to_dict())
    ctx.last_checkpoint = checkpoint


def run_write(op: PhysicalOperator, source: Stream, ctx: "RunContext") -> Stream:
    index = ctx.stores.open(op.params["index"])
    consumed = 0

    def counting() -> Stream:
        nonlocal consumed
        for doc in source:
            consumed += 1
            yield doc

    report = index.write(counting())
    ctx.counters.adjust(-consumed)
    ctx.trace.note(op.op_id, "report", report)
    ctx.last_write_report = report
    return iter(())


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def run_operator(op: PhysicalOperator, inputs: list[Stream], ctx: "RunContext") -> Stream:
    kind = op.op_kind
    if kind == "partition":
        return run_partition(op, ctx)
    if kind == "queryDatabase":
        return run_query_database(op, ctx)
    if kind == "queryVectorDatabase":
        return run_query_vector_database(op, ctx)
    if kind == "materialize":
        return run_materialize(op, inputs, ctx)
    if kind == "summarizeGenerate":
        # generate may merge several upstreams in input order
        def merged() -> Stream:
            for stream in inputs:
                yield from stream
        return run_summarize_generate(op, merged(), ctx)

    source = inputs[0] if inputs else iter(())
    if kind == "map":
        return run_map(op, source, ctx)
    if kind == "filter":
        return run_filter(op, source, ctx)
    if kind == "flatMap":
        return run_flat_map(op, source, ctx)
    if kind == "explode":
        return run_explode(op, source, ctx)
    if kind == "reduceByKey":
        return run_reduce_by_key(op, source, ctx)
    if kind == "sort":
        return run_sort(op, source, ctx)
    if kind == "take":
        return run_take(op, source, ctx)
    if kind == "count":
        return run_count(op, source, ctx)
    if kind == "llmExtract":
        return run_llm_extract(op, source, ctx)
    if kind == "llmFilter":
        return run_llm_filter(op, source, ctx)
    if kind == "llmReduceByKey":
        return run_llm_reduce_by_key(op, source, ctx)
    if kind == "embed":
        return run_embed(op, source, ctx)
    if kind == "kMeansCluster":
        return run_kmeans_cluster(op, source, ctx)
    if kind == "write":
        return run_write(op, source, ctx)
    raise ExecutionError(f"no runner for operator kind {kind!r}", operator_id=op.op_id)
