"""Acceptance suite: each test implements one release criterion at its stated
tolerance and prints a PASS line. Run with `pytest tests/test_acceptance.py -s`."""

import json
import random
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest
from starlette.testclient import TestClient

from docflow.bench.corpus import BENCH_INDEX, SyntheticCorpusSpec, generate
from docflow.bench.golden_plans import ALL_PLANS
from docflow.bench.harness import run_benchmark
from docflow.engine import Context, Executor
from docflow.llm.embedding import HashingEmbedder
from docflow.model import Document, Element
from docflow.planner import LogicalPlan, compile_plan, rewrite, validate, validate_payload
from docflow.service.app import ServiceConfig, create_app

FIXTURES = Path(__file__).parent / "fixtures"


def _passed(line: str) -> None:
    print(f"\nACCEPTANCE PASS: {line}")


# ---------------------------------------------------------------------------
# Criterion 1: operator-oracle equivalence over 200 randomized DocSets
# ---------------------------------------------------------------------------

def _random_docset(rng: random.Random):
    n = rng.randint(1, 100)
    docs = []
    for i in range(n):
        props = {}
        if rng.random() > 0.15:  # some documents miss the key field
            props["k"] = rng.choice(["a", "b", "c", "d"])
        if rng.random() > 0.1:
            props["x"] = rng.choice([rng.randint(-50, 50), rng.uniform(-10, 10)])
        elements = [
            Element(f"e{j:04d}", "text", text_representation=f"piece {j}")
            for j in range(rng.randint(0, 4))
        ]
        docs.append(
            Document(
                doc_id=f"d{i}",
                content=f"doc {i}",
                children=elements,
                properties=props,
                lineage=frozenset({f"d{i}"}),
            )
        )
    return docs


def _brute_force_groups(docs, agg):
    groups = {}
    for d in docs:
        groups.setdefault(d.properties.get("k"), []).append(d)
    out = {}
    for key, members in groups.items():
        values = [m.properties["x"] for m in members if "x" in m.properties]
        numeric = [v for v in values]
        if agg == "count":
            out[key] = len(members)
        elif not numeric:
            out[key] = None
        elif agg == "sum":
            out[key] = sum(numeric)
        elif agg == "avg":
            out[key] = sum(numeric) / len(numeric)
        elif agg == "min":
            out[key] = min(numeric)
        elif agg == "max":
            out[key] = max(numeric)
    return out


def test_operator_oracle_equivalence(tmp_path):
    started = time.monotonic()
    ctx = Context(data_dir=tmp_path / "data")
    rng = random.Random(20240810)
    threshold = {"const": 0}
    for round_no in range(200):
        docs = _random_docset(rng)
        ds = ctx.docset_from(docs)

        agg = ("count", "sum", "min", "max", "avg")[round_no % 5]
        got = ds.reduce_by_key(["k"], agg, "x" if agg != "count" else None).collect()
        got_map = {d.properties["k"]: d.properties[agg] for d in got}
        assert got_map == _brute_force_groups(docs, agg), f"round {round_no}, agg {agg}"

        kept = ds.filter(expression={"op": ">", "args": [{"field": "x"}, threshold]}).collect()
        expected_kept = [d.doc_id for d in docs if isinstance(d.properties.get("x"), (int, float)) and d.properties["x"] > 0]
        assert [d.doc_id for d in kept] == expected_kept

        exploded = ds.explode().collect()
        expected_stream = []
        for d in docs:
            expected_stream.append(d.doc_id)
            expected_stream.extend(f"{d.doc_id}#{e.element_id}" for e in d.children)
        assert [d.doc_id for d in exploded] == expected_stream

    elapsed = time.monotonic() - started
    assert elapsed < 60, f"took {elapsed:.1f}s, budget is 60s"
    _passed(f"operator-oracle equivalence: 200 randomized DocSets, exact equality, {elapsed:.1f}s < 60s")


# ---------------------------------------------------------------------------
# Criterion 2: hybrid-store soundness/completeness on a 1000-doc corpus
# ---------------------------------------------------------------------------

def test_hybrid_store_soundness_completeness(tmp_path):
    started = time.monotonic()
    rng = random.Random(99)
    vocab = [f"term{i}" for i in range(60)]
    ctx = Context(data_dir=tmp_path / "data")
    docs = []
    for i in range(1000):
        words = " ".join(rng.choice(vocab) for _ in range(rng.randint(6, 18)))
        second = " ".join(rng.choice(vocab) for _ in range(rng.randint(6, 18)))
        docs.append(
            Document(
                doc_id=f"r{i:05d}",
                content=words + "\n" + second,
                children=[
                    Element("e0000", "text", text_representation=words),
                    Element("e0001", "text", text_representation=second),
                ],
                properties={
                    "region": rng.choice(["north", "south", "east", "west"]),
                    "score": rng.randint(0, 100),
                    "code": rng.choice(["AA", "AB", "BA", "BB"]) + str(rng.randint(0, 9)),
                },
                lineage=frozenset({f"r{i:05d}"}),
            )
        )
    ctx.docset_from(docs).explode().embed().write("big")
    index = ctx.stores.open("big")
    by_id = {d.doc_id: d for d in docs}

    predicates = [
        [{"field": "region", "op": "eq", "value": "north"}],
        [{"field": "score", "op": "range", "min": 20, "max": 75}],
        [{"field": "score", "op": "range", "min": 90}],
        [{"field": "code", "op": "prefix", "value": "AB"}],
        [{"field": "region", "op": "in", "values": ["east", "west"]}],
        [
            {"field": "region", "op": "eq", "value": "south"},
            {"field": "score", "op": "range", "max": 40, "max_exclusive": True},
        ],
    ]

    def matches(doc, pred):
        v = doc.properties.get(pred["field"])
        op = pred["op"]
        if op == "eq":
            return v == pred["value"]
        if op == "in":
            return v in pred["values"]
        if op == "prefix":
            return isinstance(v, str) and v.startswith(pred["value"])
        lo, hi = pred.get("min"), pred.get("max")
        if v is None:
            return False
        if lo is not None and (v <= lo if pred.get("min_exclusive") else v < lo):
            return False
        if hi is not None and (v >= hi if pred.get("max_exclusive") else v > hi):
            return False
        return True

    for preds in predicates:
        got = {d.doc_id for d in index.query(filters=preds)}
        expected = {d.doc_id for d in docs if all(matches(d, p) for p in preds)}
        assert got == expected, f"filter soundness/completeness failed for {preds}"

    # exact kNN vs an independent naive cosine scan
    embedder = HashingEmbedder()
    snap = index._load()
    for query in ["term1 term2 term3", "term40 term41", "term59 term0 term17 term5"]:
        got = index.search_chunks(query, k=25)
        qv = np.asarray(embedder.embed(query).values, dtype=np.float64)
        naive = sorted(
            (
                (c.chunk_id, float(np.dot(snap.vectors[row].astype(np.float64), qv)))
                for row, c in enumerate(snap.chunks)
                if c.has_embedding
            ),
            key=lambda t: (-t[1], t[0]),
        )[:25]
        assert [c.chunk_id for c, _ in got] == [cid for cid, _ in naive]

    # reassembly round-trip
    for doc_id, doc in by_id.items():
        assert index.reassembled_text(doc_id) == doc.text_representation

    elapsed = time.monotonic() - started
    assert elapsed < 120, f"took {elapsed:.1f}s, budget is 120s"
    _passed(f"hybrid-store soundness/completeness on 1000 docs, exact kNN, reassembly, {elapsed:.1f}s < 120s")


# ---------------------------------------------------------------------------
# Criterion 3: plan validation fixtures
# ---------------------------------------------------------------------------

def test_plan_validation_fixture_suite(bench_schema):
    cases = json.loads((FIXTURES / "invalid_plans.json").read_text())
    assert len(cases) >= 20
    rejected = 0
    for case in cases:
        violations = validate_payload(case["plan"], bench_schema, BENCH_INDEX)
        assert violations, f"{case['name']} must be rejected"
        expect = case["expect"]
        matching = [v for v in violations if v.code == expect["code"]]
        assert matching, f"{case['name']}: expected a {expect['code']} violation"
        if "node_id" in expect:
            assert any(v.node_id == expect["node_id"] for v in matching), f"{case['name']} must name the node"
        rejected += 1
    for name, plan_dict in ALL_PLANS.items():
        plan = LogicalPlan.from_dict(plan_dict, plan_dict["query"])
        assert validate(plan, bench_schema, BENCH_INDEX) == [], f"golden plan {name} must validate"
    _passed(f"plan validation: {rejected}/{len(cases)} invalid plans rejected with node-accurate violations; all golden plans accepted")


# ---------------------------------------------------------------------------
# Criterion 4: rewrite soundness over the golden set
# ---------------------------------------------------------------------------

def _execution_signature(ctx, plan, schema):
    compiled = compile_plan(plan, schema)
    result = Executor(ctx.new_run()).execute(compiled.physical, "collect")

    def stable_id(doc_id: str) -> str:
        # synthetic ids embed the physical operator id, which differs between
        # compilations of equivalent plans; compare them by family instead
        return doc_id.split(":")[0] if doc_id.startswith(("generate:", "count:")) else doc_id

    return [
        (
            stable_id(d.doc_id),
            tuple(sorted((k, json.dumps(v, sort_keys=True)) for k, v in d.properties.items() if not k.startswith("_"))),
            d.text_representation,
        )
        for d in result.docs
    ]


def test_rewrite_soundness(bench_context, bench_schema):
    checked = 0
    for name, plan_dict in ALL_PLANS.items():
        plan = LogicalPlan.from_dict(plan_dict, plan_dict["query"])
        rewritten = rewrite(plan, bench_schema)
        before = _execution_signature(bench_context, plan, bench_schema)
        after = _execution_signature(bench_context, rewritten, bench_schema)
        assert before == after, f"rewrite changed results for {name}"
        checked += 1

    merged = rewrite(LogicalPlan.from_dict(ALL_PLANS["aux_merge_extracts"], "q"), bench_schema)
    assert sum(1 for n in merged.nodes if n.op == "LlmExtract") == 1
    _passed(f"rewrite soundness: execute(compile(p)) == execute(compile(rewrite(p))) for {checked} golden plans; extract-merge collapses to one node")


# ---------------------------------------------------------------------------
# Criterion 5: end-to-end benchmark (the published methodology at desk scale)
# ---------------------------------------------------------------------------

def test_end_to_end_benchmark(tmp_path_factory):
    started = time.monotonic()
    corpus = tmp_path_factory.mktemp("acceptance-corpus")
    generate(SyntheticCorpusSpec(), corpus)
    client = TestClient(
        create_app(ServiceConfig(data_dir=str(tmp_path_factory.mktemp("acceptance-data")))),
        raise_server_exceptions=False,
    )

    luna = run_benchmark(client, corpus, "luna")
    assert luna["totals"]["Correct"] >= 28, f"NL-analytics path scored {luna['totals']}"

    rag = run_benchmark(client, corpus, "rag", k=100)
    by_id = {r["id"]: r for r in rag["per_question"]}
    assert by_id["q06"]["verdict"] == "Incorrect", "RAG must fail the large-population count"
    assert by_id["q05"]["verdict"] == "Correct", "RAG must answer the zero-cardinality question"
    assert by_id["q04"]["verdict"] == "Correct", "RAG must answer the small doc-list question"
    assert luna["totals"]["Correct"] > rag["totals"]["Correct"], "directional shape must hold"

    poisoned_corpus = tmp_path_factory.mktemp("poisoned-corpus")
    generate(SyntheticCorpusSpec(include_disclaimer=True), poisoned_corpus)
    poisoned_client = TestClient(
        create_app(ServiceConfig(data_dir=str(tmp_path_factory.mktemp("poisoned-data")))),
        raise_server_exceptions=False,
    )
    poisoned = run_benchmark(poisoned_client, poisoned_corpus, "rag", k=100, question_ids=["q07"])
    assert poisoned["per_question"][0]["verdict"] == "Refusal", "boilerplate context must poison the answer"

    elapsed = time.monotonic() - started
    assert elapsed < 600, f"took {elapsed:.1f}s, budget is 10 minutes"
    _passed(
        "end-to-end benchmark: NL-analytics "
        f"{luna['totals']['Correct']}/30 correct (≥28); RAG k=100 fails the damage count, "
        f"answers Hawaii=0 and the July bird list, and refuses under the poisoned disclaimer; {elapsed:.1f}s < 600s"
    )


# ---------------------------------------------------------------------------
# Criterion 6: determinism and lineage
# ---------------------------------------------------------------------------

def test_determinism_and_lineage(bench_corpus, tmp_path_factory):
    client = TestClient(
        create_app(ServiceConfig(data_dir=str(tmp_path_factory.mktemp("determinism-data")))),
        raise_server_exceptions=False,
    )
    sample_ids = ["q01", "q07", "q15", "q25", "q30"]
    first = run_benchmark(client, bench_corpus, "luna", question_ids=sample_ids)
    second = run_benchmark(client, bench_corpus, "luna", question_ids=sample_ids)

    for a, b in zip(first["per_question"], second["per_question"]):
        assert a["verdict"] == b["verdict"] == "Correct"
        assert a["answer_text"] == b["answer_text"], a["id"]
        trace_a = client.get(f"/traces/{a['trace_id']}").json()
        trace_b = client.get(f"/traces/{b['trace_id']}").json()
        counts_a = [(o["op_kind"], o["input_count"], o["output_count"]) for o in trace_a["operators"]]
        counts_b = [(o["op_kind"], o["input_count"], o["output_count"]) for o in trace_b["operators"]]
        assert counts_a == counts_b, a["id"]

    # every result document reaches an ingested root through lineage edges
    session = client.post("/sessions", json={"index_name": BENCH_INDEX}).json()["session_id"]
    body = client.post(f"/sessions/{session}/query", json={"text": "Which incidents involved bird strikes?"}).json()
    trace = client.get(f"/traces/{body['trace_id']}").json()
    roots, edges = set(trace["roots"]), trace["lineage_edges"]

    def reaches(doc_id):
        stack, seen = [doc_id], set()
        while stack:
            cur = stack.pop()
            if cur in roots:
                return True
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(edges.get(cur, []))
        return False

    assert body["answer"]["doc_ids"]
    for doc_id in body["answer"]["doc_ids"]:
        assert reaches(doc_id), doc_id

    # checkpoint resume equals un-checkpointed execution
    ctx = Context(data_dir=tmp_path_factory.mktemp("ckpt-data"))
    docs = [
        Document(doc_id=f"d{i}", content=f"doc {i}", properties={"n": i}, lineage=frozenset({f"d{i}"}))
        for i in range(40)
    ]
    direct = ctx.docset_from(docs).filter(expression={"op": ">=", "args": [{"field": "n"}, {"const": 20}]}).collect()
    checkpoint = ctx.docset_from(docs).materialize("acceptance-mid", target="disk")
    resumed = ctx.resume_from(checkpoint).filter(expression={"op": ">=", "args": [{"field": "n"}, {"const": 20}]}).collect()
    assert [d.to_dict() for d in resumed] == [d.to_dict() for d in direct]

    _passed("determinism & lineage: re-runs byte-stable, result documents reach ingested roots, checkpoint resume equals direct execution")
