import json

import pytest

from docflow.bench.corpus import BENCH_INDEX
from docflow.bench.harness import ensure_ingested


@pytest.fixture(scope="module")
def client(service_client, bench_corpus):
    ensure_ingested(service_client, bench_corpus, BENCH_INDEX)
    return service_client


def _session(client, index=BENCH_INDEX):
    resp = client.post("/sessions", json={"index_name": index})
    assert resp.status_code == 200
    return resp.json()["session_id"]


def _ask(client, session_id, text):
    resp = client.post(f"/sessions/{session_id}/query", json={"text": text})
    assert resp.status_code == 200, resp.text
    return resp.json()


def test_health_and_indexes(client):
    assert client.get("/health").json()["status"] == "ok"
    assert BENCH_INDEX in client.get("/indexes").json()["indexes"]
    schema = client.get(f"/indexes/{BENCH_INDEX}/schema").json()
    assert any(f["name"] == "aircraftDamage" for f in schema["fields"])


def test_missing_index_is_404(client):
    assert client.get("/indexes/nowhere/schema").status_code == 404
    assert client.post("/sessions", json={"index_name": "nowhere"}).status_code == 404


def test_hawaii_count_is_zero(client):
    session = _session(client)
    body = _ask(client, session, "How many incidents were there in Hawaii?")
    assert body["answer"]["scalar"] == 0
    assert body["trace_id"]


def test_follow_up_uses_history(client):
    session = _session(client)
    first = _ask(client, session, "How many incidents involved substantial damage?")
    assert first["answer"]["scalar"] == 94
    second = _ask(client, session, "What about incidents without substantial damage?")
    assert second["answer"]["scalar"] == 6
    turns = client.get(f"/sessions/{session}").json()["turns"]
    assert len(turns) == 2 and turns[1]["query"].startswith("What about")


def test_two_node_plan_trace_has_two_operator_records(client):
    session = _session(client)
    body = _ask(client, session, "How many incidents are in the collection in total?")
    trace = client.get(f"/traces/{body['trace_id']}").json()
    assert len(trace["operators"]) == 2
    assert [op["op_kind"] for op in trace["operators"]] == ["queryDatabase", "count"]


def test_drilldown_docs_resolve_to_sources(client):
    session = _session(client)
    body = _ask(client, session, "Which incidents resulted in the aircraft being destroyed?")
    trace = client.get(f"/traces/{body['trace_id']}").json()
    scan = trace["operators"][0]
    page = client.get(f"/traces/{body['trace_id']}/operators/{scan['op_id']}/docs?offset=0&limit=3").json()
    assert page["docs"], "drill-down should expose sampled documents"
    for doc in page["docs"]:
        for root in doc["lineage"]:
            resolved = client.get(f"/docs/{root}")
            assert resolved.status_code == 200
            assert resolved.json()["document"]["doc_id"] == root
            assert resolved.json()["document"]["children"], "source renders with its element tree"


def test_answer_docs_reach_roots_via_trace(client):
    session = _session(client)
    body = _ask(client, session, "Which incidents involved bird strikes?")
    trace = client.get(f"/traces/{body['trace_id']}").json()
    roots = set(trace["roots"])
    edges = trace["lineage_edges"]

    def reaches(doc_id, seen=()):
        if doc_id in roots:
            return True
        return any(reaches(parent, seen) for parent in edges.get(doc_id, []))

    assert body["answer"]["doc_ids"]
    for doc_id in body["answer"]["doc_ids"]:
        assert reaches(doc_id), doc_id


def test_edit_plan_changes_answer(client):
    session = _session(client)
    body = _ask(client, session, "List the incidents in California involving engine problems.")
    ca_ids = set(body["answer"]["doc_ids"])
    edited = json.loads(json.dumps(body["plan"]))
    for node in edited["nodes"]:
        if node["op"] == "LlmFilter" and "California" in node["params"]["question"]:
            node["params"]["question"] = "Did the incident occur in Texas?"
    resp = client.put(f"/sessions/{session}/turns/0/plan", json={"plan": edited})
    assert resp.status_code == 200
    tx_body = resp.json()
    assert tx_body["edited"] is True
    tx_ids = set(tx_body["answer"]["doc_ids"])
    assert tx_ids != ca_ids  # different filter, different population
    turns = client.get(f"/sessions/{session}").json()["turns"]
    assert turns[-1]["edited"] is True


def test_edit_with_unknown_field_is_422_and_never_executes(client):
    session = _session(client)
    body = _ask(client, session, "How many incidents occurred at night?")
    edited = json.loads(json.dumps(body["plan"]))
    for node in edited["nodes"]:
        if node["op"] == "QueryDatabase":
            node["params"]["filters"] = [{"field": "pilot_age", "op": "eq", "value": 60}]
    resp = client.put(f"/sessions/{session}/turns/0/plan", json={"plan": edited})
    assert resp.status_code == 422
    detail = resp.json()["detail"]
    assert any(v["code"] == "unknown-field" and v.get("field") == "pilot_age" for v in detail["violations"])
    turns = client.get(f"/sessions/{session}").json()["turns"]
    assert len(turns) == 1  # the invalid edit was never stored or executed


def test_noop_edit_reproduces_answer(client):
    session = _session(client)
    body = _ask(client, session, "How many incidents involved Cessna aircraft?")
    resp = client.put(f"/sessions/{session}/turns/0/plan", json={"plan": body["plan"]})
    assert resp.status_code == 200
    assert resp.json()["answer"] == body["answer"]


def test_session_replay_reproduces_answers(client):
    questions = [
        "How many incidents involved substantial damage?",
        "What about incidents without substantial damage?",
    ]
    first = _session(client)
    answers_a = [_ask(client, first, q)["answer"] for q in questions]
    second = _session(client)
    answers_b = [_ask(client, second, q)["answer"] for q in questions]
    assert answers_a == answers_b


def test_unknown_session_query_is_404(client):
    assert client.post("/sessions/nope/query", json={"text": "hi"}).status_code == 404
    assert client.get("/traces/nope").status_code == 404
    assert client.get("/docs/nope").status_code == 404


def test_plan_endpoint_reports_rewrites(client):
    resp = client.post("/plan", json={"query": "How many incidents occurred in 2023?", "index_name": BENCH_INDEX})
    assert resp.status_code == 200
    body = resp.json()
    assert body["plan"]["nodes"]
    assert "query_database" in body["script"]


def test_rag_small_answer(client):
    resp = client.post("/rag", json={"question": "Which incidents occurred in July involving birds?", "k": 100, "index_name": BENCH_INDEX})
    assert resp.status_code == 200
    body = resp.json()
    assert body["retrieved_doc_ids"]
    assert body["included_chunks"] > 0
    assert "CEN24LA" in body["answer"]


def test_rag_unknown_index(client):
    resp = client.post("/rag", json={"question": "q", "k": 5, "index_name": "missing"})
    assert resp.status_code == 404


def test_plan_schema_endpoint(client):
    schema = client.get("/plan-schema").json()
    assert schema["title"] == "Logical query plan"
