"""REST service: sessions, planning, execution, traces, plan editing, RAG.

The service is the verification surface: every answer comes back with the
plan that produced it, the rewritten plan that actually ran, a readable
script rendering, and a trace id whose trace exposes per-operator counts,
document samples, lineage edges, and the full LLM transcript.
"""

from __future__ import annotations

import json
import threading
import uuid
from collections import defaultdict
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from docflow.engine import Context, Executor, write_trace_file
from docflow.errors import (
    DocflowError,
    ExecutionError,
    FixtureMissingError,
    PlanningError,
    UnknownFieldError,
)
from docflow.llm.base import LlmRequest
from docflow.llm.config import LlmConfig, ProviderSpec
from docflow.llm.embedding import tokenize
from docflow.ops import prompts as op_prompts
from docflow.planner import (
    LogicalPlan,
    Planner,
    compile_plan,
    plan_json_schema,
    rewrite,
    validate_payload,
)
from docflow.service.answers import build_answer
from docflow.service.models import (
    AnswerModel,
    IndexListResponse,
    IngestRequest,
    IngestResponse,
    PlanEditRequest,
    PlanRequest,
    PlanResponse,
    QueryRequest,
    QueryResponse,
    RagRequest,
    RagResponse,
    SessionCreateRequest,
    SessionCreateResponse,
)


def bundled_planner_fixtures() -> Optional[str]:
    path = resources.files("docflow.bench").joinpath("data/planner_fixtures.json")
    try:
        return str(path) if path.is_file() else None
    except (OSError, AttributeError):
        return None


def default_llm_config() -> LlmConfig:
    """Offline-friendly default: scripted planner fixtures + rule-based oracle."""
    providers = {"default": ProviderSpec(kind="oracle")}
    fixtures = bundled_planner_fixtures()
    if fixtures:
        providers["plan"] = ProviderSpec(kind="scripted", fixture_file=fixtures)
    return LlmConfig(providers=providers)


class ServiceConfig(BaseModel):
    data_dir: str = "./docflow_data"
    host: str = "127.0.0.1"
    port: int = 8600
    llm: LlmConfig = Field(default_factory=default_llm_config)
    llm_config_file: Optional[str] = None  # alternative to inlining `llm`
    parallelism: int = 4
    generate_budget: int = 8000
    rag_budget: int = 2500
    ui_dir: Optional[str] = None

    @staticmethod
    def from_file(path: str | Path) -> "ServiceConfig":
        config = ServiceConfig.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))
        if config.llm_config_file:
            llm_path = Path(config.llm_config_file)
            if not llm_path.is_absolute():
                llm_path = Path(path).parent / llm_path
            config = config.model_copy(update={"llm": LlmConfig.from_file(llm_path)})
        return config


class AppState:
    def __init__(self, config: ServiceConfig) -> None:
        self.config = config
        self.data_dir = Path(config.data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.traces_dir = self.data_dir / "traces"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.traces_dir.mkdir(parents=True, exist_ok=True)
        self.context = Context(
            data_dir=self.data_dir,
            llm_config=config.llm,
            parallelism=config.parallelism,
            generate_budget=config.generate_budget,
        )
        self._session_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)

    # -- session persistence ------------------------------------------------

    def session_lock(self, session_id: str) -> threading.Lock:
        return self._session_locks[session_id]

    def load_session(self, session_id: str) -> dict:
        path = self.sessions_dir / f"{session_id}.json"
        if not path.exists():
            raise HTTPException(status_code=404, detail={"error": f"unknown session {session_id!r}"})
        return json.loads(path.read_text(encoding="utf-8"))

    def save_session(self, session: dict) -> None:
        path = self.sessions_dir / f"{session['session_id']}.json"
        path.write_text(json.dumps(session, ensure_ascii=False, indent=2), encoding="utf-8")

    def open_index(self, name: str):
        index = self.context.stores.open(name)
        if not index.exists():
            raise HTTPException(status_code=404, detail={"error": f"unknown index {name!r}"})
        return index


def _violations_422(violations: list[dict], message: str) -> HTTPException:
    return HTTPException(status_code=422, detail={"error": message, "violations": violations})


def run_turn(
    state: AppState,
    session: dict,
    query: Optional[str] = None,
    plan_payload: Optional[dict] = None,
    edited: bool = False,
) -> dict:
    """plan → validate → rewrite → compile → execute → persist turn."""
    index = state.open_index(session["index_name"])
    schema = index.schema
    llm = state.context.new_llm_client()

    if plan_payload is None:
        assert query is not None
        history = [
            {"query": t["query"], "plan": t["plan"], "answer": t["answer"]["text"]}
            for t in session["turns"]
        ]
        planner = Planner(llm)
        try:
            plan = planner.plan(query, schema, history, session["index_name"])
        except PlanningError as exc:
            raise _violations_422(list(exc.violations), str(exc))
        except FixtureMissingError as exc:
            raise HTTPException(status_code=422, detail={"error": f"planner fixture missing: {exc}", "violations": []})
    else:
        violations = validate_payload(plan_payload, schema, session["index_name"])
        if violations:
            raise _violations_422([v.to_dict() for v in violations], "plan failed validation")
        plan = LogicalPlan.from_dict(plan_payload, query if query is not None else str(plan_payload.get("query", "")))

    rewritten = rewrite(plan, schema)
    compiled = compile_plan(rewritten, schema)

    run_ctx = state.context.new_run(llm=llm)
    try:
        result = Executor(run_ctx).execute(compiled.physical, "collect")
    except ExecutionError as exc:
        trace = getattr(exc, "trace", None)
        if trace is not None:
            write_trace_file(trace, state.traces_dir)
        raise HTTPException(status_code=500, detail={"error": str(exc), "operator_id": exc.operator_id})
    write_trace_file(result.trace, state.traces_dir)

    answer = build_answer(rewritten.node(rewritten.result_node), result.docs or [])
    turn = {
        "query": plan.query,
        "plan": plan.to_dict(),
        "rewritten_plan": rewritten.to_dict(),
        "script": compiled.script,
        "answer": answer,
        "trace_id": result.trace.run_id,
        "edited": edited,
    }
    session["turns"].append(turn)
    state.save_session(session)
    return {
        "session_id": session["session_id"],
        "turn_index": len(session["turns"]) - 1,
        "plan": turn["plan"],
        "rewritten_plan": turn["rewritten_plan"],
        "script": turn["script"],
        "answer": answer,
        "trace_id": turn["trace_id"],
        "edited": edited,
    }


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()
    state = AppState(config)
    app = FastAPI(
        title="docflow query service",
        description="Natural-language analytics over document collections: "
        "inspectable plans, traces, lineage, and a RAG baseline.",
        version="0.1.0",
    )
    app.state.docflow = state

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "data_dir": str(state.data_dir)}

    @app.get("/plan-schema")
    def get_plan_schema() -> dict:
        return plan_json_schema()

    # -- indexes -------------------------------------------------------------

    @app.get("/indexes", response_model=IndexListResponse)
    def list_indexes() -> IndexListResponse:
        return IndexListResponse(indexes=state.context.stores.list_indexes())

    @app.get("/indexes/{name}/schema")
    def index_schema(name: str) -> dict:
        return state.open_index(name).schema.to_dict()

    @app.get("/indexes/{name}/stats")
    def index_stats(name: str) -> dict:
        return state.open_index(name).stats()

    @app.post("/indexes/{name}/ingest", response_model=IngestResponse)
    def ingest(name: str, body: IngestRequest) -> IngestResponse:
        if not Path(body.input_dir).is_dir():
            raise HTTPException(status_code=404, detail={"error": f"input directory {body.input_dir!r} not found"})
        ds = state.context.read_docparse(body.input_dir)
        if body.extract_fields:
            ds = ds.llm_extract(body.extract_fields)
        ds = ds.explode().embed()
        try:
            report = ds.write(name)
        except ExecutionError as exc:
            raise HTTPException(status_code=500, detail={"error": str(exc), "operator_id": exc.operator_id})
        return IngestResponse(report=report)

    @app.get("/docs/{doc_id}")
    def get_document(doc_id: str) -> dict:
        found = state.context.stores.find_document(doc_id)
        if found is None:
            raise HTTPException(status_code=404, detail={"error": f"unknown document {doc_id!r}"})
        index_name, doc = found
        return {"index": index_name, "document": doc.to_dict()}

    # -- sessions and queries --------------------------------------------------

    @app.post("/sessions", response_model=SessionCreateResponse)
    def create_session(body: SessionCreateRequest) -> SessionCreateResponse:
        state.open_index(body.index_name)
        session = {"session_id": uuid.uuid4().hex[:12], "index_name": body.index_name, "turns": []}
        state.save_session(session)
        return SessionCreateResponse(session_id=session["session_id"], index_name=body.index_name)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return state.load_session(session_id)

    @app.post("/sessions/{session_id}/query", response_model=QueryResponse)
    def post_query(session_id: str, body: QueryRequest) -> QueryResponse:
        with state.session_lock(session_id):
            session = state.load_session(session_id)
            return QueryResponse(**run_turn(state, session, query=body.text))

    @app.put("/sessions/{session_id}/turns/{turn_index}/plan", response_model=QueryResponse)
    def put_plan(session_id: str, turn_index: int, body: PlanEditRequest) -> QueryResponse:
        with state.session_lock(session_id):
            session = state.load_session(session_id)
            if turn_index < 0 or turn_index >= len(session["turns"]):
                raise HTTPException(status_code=404, detail={"error": f"no turn {turn_index}"})
            original_query = session["turns"][turn_index]["query"]
            return QueryResponse(
                **run_turn(state, session, query=original_query, plan_payload=body.plan, edited=True)
            )

    # -- stateless planning ------------------------------------------------------

    @app.post("/plan", response_model=PlanResponse)
    def plan_only(body: PlanRequest) -> PlanResponse:
        index = state.open_index(body.index_name)
        schema = index.schema
        planner = Planner(state.context.new_llm_client())
        try:
            plan = planner.plan(body.query, schema, [], body.index_name)
        except PlanningError as exc:
            raise _violations_422(list(exc.violations), str(exc))
        except FixtureMissingError as exc:
            raise HTTPException(status_code=422, detail={"error": f"planner fixture missing: {exc}", "violations": []})
        rewritten = rewrite(plan, schema)
        compiled = compile_plan(rewritten, schema)
        return PlanResponse(
            plan=plan.to_dict(),
            rewritten_plan=rewritten.to_dict(),
            script=compiled.script,
            rewritten=plan.to_dict() != rewritten.to_dict(),
        )

    # -- traces -----------------------------------------------------------------

    @app.get("/traces/{trace_id}")
    def get_trace(trace_id: str) -> dict:
        path = state.traces_dir / f"{trace_id}.json"
        if not path.exists():
            raise HTTPException(status_code=404, detail={"error": f"unknown trace {trace_id!r}"})
        return json.loads(path.read_text(encoding="utf-8"))

    @app.get("/traces/{trace_id}/operators/{op_id}/docs")
    def trace_operator_docs(trace_id: str, op_id: str, offset: int = 0, limit: int = 10) -> dict:
        trace = get_trace(trace_id)
        for record in trace["operators"]:
            if record["op_id"] == op_id:
                sample = record.get("sample", [])
                return {
                    "op_id": op_id,
                    "op_kind": record["op_kind"],
                    "input_count": record["input_count"],
                    "output_count": record["output_count"],
                    "sample_total": len(sample),
                    "docs": sample[offset : offset + limit],
                }
        raise HTTPException(status_code=404, detail={"error": f"trace has no operator {op_id!r}"})

    # -- RAG baseline -------------------------------------------------------------

    @app.post("/rag", response_model=RagResponse)
    def rag(body: RagRequest) -> RagResponse:
        index_name = body.index_name
        if index_name is None:
            names = state.context.stores.list_indexes()
            if len(names) != 1:
                raise HTTPException(
                    status_code=400,
                    detail={"error": "index_name required when more than one index exists"},
                )
            index_name = names[0]
        index = state.open_index(index_name)
        try:
            hits = index.search_chunks(body.question, body.k)
        except UnknownFieldError as exc:
            raise HTTPException(status_code=422, detail={"error": str(exc)})

        retrieved: list[str] = []
        entries: list[str] = []
        used = 0
        truncated = 0
        for chunk, _score in hits:
            if chunk.parent_doc_id not in retrieved:
                retrieved.append(chunk.parent_doc_id)
            cost = len(tokenize(chunk.text)) + 1
            if used + cost <= state.config.rag_budget:
                entries.append(op_prompts.render_context_entry(chunk.parent_doc_id, chunk.text))
                used += cost
            else:
                truncated += 1
        llm = state.context.new_llm_client()
        request = LlmRequest(
            purpose="generate",
            system_prompt=op_prompts.GENERATE_SYSTEM,
            user_prompt=op_prompts.GENERATE_USER.replace("{question}", body.question).replace(
                "{context}", "\n".join(entries) or "(no documents)"
            ),
        )
        answer = llm.complete(request, tag="rag")
        return RagResponse(
            answer=answer,
            retrieved_doc_ids=retrieved,
            included_chunks=len(entries),
            truncated_chunks=truncated,
        )

    if config.ui_dir and Path(config.ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app
