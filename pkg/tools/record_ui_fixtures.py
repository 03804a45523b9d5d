"""Record real service responses into fixtures for the frontend tests.

The UI test suite replays these against a mocked fetch, so the components are
tested against byte-real API shapes without running Python in CI for the
frontend. Regenerate after changing the service contract:

    python3 tools/record_ui_fixtures.py
"""

import json
import tempfile
from pathlib import Path

from starlette.testclient import TestClient

from docflow.bench.corpus import BENCH_INDEX, SyntheticCorpusSpec, generate
from docflow.bench.harness import ensure_ingested
from docflow.service.app import ServiceConfig, create_app

CESSNA_QUERY = "Get the latitude and longitude of all incidents in 2023 involving Cessna aircraft"

OUT = Path(__file__).parent.parent / "frontend" / "tests" / "fixtures" / "service.json"


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        corpus = Path(tmp) / "corpus"
        generate(SyntheticCorpusSpec(), corpus)
        client = TestClient(create_app(ServiceConfig(data_dir=f"{tmp}/data")), raise_server_exceptions=False)
        ensure_ingested(client, corpus, BENCH_INDEX)

        fixtures: dict = {}
        fixtures["indexes"] = client.get("/indexes").json()
        fixtures["schema"] = client.get(f"/indexes/{BENCH_INDEX}/schema").json()

        session_id = client.post("/sessions", json={"index_name": BENCH_INDEX}).json()["session_id"]
        turn = client.post(f"/sessions/{session_id}/query", json={"text": CESSNA_QUERY}).json()
        turn["session_id"] = "SESSION"
        fixtures["cessna_turn"] = turn

        trace = client.get(f"/traces/{turn['trace_id']}").json()
        fixtures["cessna_trace"] = trace

        scan_op = trace["operators"][0]["op_id"]
        fixtures["drilldown"] = client.get(
            f"/traces/{turn['trace_id']}/operators/{scan_op}/docs?offset=0&limit=5"
        ).json()

        sample_root = sorted(trace["roots"])[0]
        fixtures["source_doc"] = client.get(f"/docs/{sample_root}").json()

        invalid = json.loads(json.dumps(turn["plan"]))
        for node in invalid["nodes"]:
            if node["op"] == "QueryDatabase":
                node["params"]["filters"] = [{"field": "pilot_age", "op": "eq", "value": 1}]
        resp = client.put(f"/sessions/{session_id}/turns/0/plan", json={"plan": invalid})
        assert resp.status_code == 422
        fixtures["invalid_edit_response"] = resp.json()

        valid = json.loads(json.dumps(turn["plan"]))
        for node in valid["nodes"]:
            if node["op"] == "QueryDatabase":
                node["params"]["filters"] = [
                    {"field": "date", "op": "prefix", "value": "2024"},
                    {"field": "aircraftManufacturer", "op": "eq", "value": "Cessna"},
                ]
        resp = client.put(f"/sessions/{session_id}/turns/0/plan", json={"plan": valid})
        assert resp.status_code == 200
        edited = resp.json()
        edited["session_id"] = "SESSION"
        fixtures["valid_edit_response"] = edited
        fixtures["valid_edit_plan"] = valid

        fixtures["session_created"] = {"session_id": "SESSION", "index_name": BENCH_INDEX}

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(fixtures, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
