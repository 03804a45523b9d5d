"""Command-line client.

Every command except `serve` and `bench generate` talks to the REST service.
With --server the client targets a running instance; without it the service
app is mounted in-process (same API, no socket), so single-machine workflows
need no daemon.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path
from typing import Optional

import click
import httpx

from docflow.service.app import ServiceConfig, create_app


def _load_config(config_file: Optional[str]) -> ServiceConfig:
    path = config_file or os.environ.get("DOCFLOW_CONFIG")
    return ServiceConfig.from_file(path) if path else ServiceConfig()


def _client(server: Optional[str], config_file: Optional[str], data_dir: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    # no server given: mount the service in-process and still speak HTTP to it
    from starlette.testclient import TestClient

    config = _load_config(config_file)
    if data_dir:
        config = config.model_copy(update={"data_dir": data_dir})
    return TestClient(create_app(config), raise_server_exceptions=False)


def _fail_on_error(resp: httpx.Response) -> None:
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise click.ClickException(f"HTTP {resp.status_code}: {json.dumps(detail, indent=2, ensure_ascii=False)}")


server_option = click.option("--server", default=None, help="Base URL of a running service; in-process when omitted.")
config_option = click.option("--config", "config_file", default=None, type=click.Path(exists=True), help="Service config JSON.")
data_dir_option = click.option("--data-dir", default=None, help="Data directory (in-process mode).")


@click.group()
def main() -> None:
    """Document analytics engine: ingest, plan, query, trace, benchmark."""


@main.command()
@config_option
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
@click.option("--data-dir", default=None)
@click.option("--ui-dir", default=None, help="Directory of built UI assets to serve at /ui.")
def serve(config_file: Optional[str], host: Optional[str], port: Optional[int], data_dir: Optional[str], ui_dir: Optional[str]) -> None:
    """Run the REST service."""
    import uvicorn

    config = _load_config(config_file)
    updates = {k: v for k, v in {"host": host, "port": port, "data_dir": data_dir, "ui_dir": ui_dir}.items() if v is not None}
    config = config.model_copy(update=updates)
    uvicorn.run(create_app(config), host=config.host, port=config.port)


@main.command()
@click.option("--input", "input_dir", required=True, type=click.Path(exists=True), help="Directory of ingestion JSON files.")
@click.option("--index", "index_name", required=True)
@click.option("--schema", "schema_file", default=None, type=click.Path(exists=True), help="Extraction schema JSON ({\"fields\": [...]}).")
@server_option
@config_option
@data_dir_option
def ingest(input_dir: str, index_name: str, schema_file: Optional[str], server: Optional[str], config_file: Optional[str], data_dir: Optional[str]) -> None:
    """Parse, extract, chunk, embed, and index a document directory."""
    body: dict = {"input_dir": str(Path(input_dir).resolve())}
    if schema_file:
        body["extract_fields"] = json.loads(Path(schema_file).read_text(encoding="utf-8"))["fields"]
    with _client(server, config_file, data_dir) as client:
        resp = client.post(f"/indexes/{index_name}/ingest", json=body)
        _fail_on_error(resp)
        click.echo(json.dumps(resp.json()["report"], indent=2))


@main.command()
@click.option("--query", "query_text", required=True)
@click.option("--index", "index_name", required=True)
@click.option("--show-rewrites", is_flag=True, help="Print the rewritten plan when it differs.")
@click.option("--dump-plan", "dump_plan", default=None, type=click.Path(), help="Write the plan JSON to a file.")
@server_option
@config_option
@data_dir_option
def plan(query_text: str, index_name: str, show_rewrites: bool, dump_plan: Optional[str], server: Optional[str], config_file: Optional[str], data_dir: Optional[str]) -> None:
    """Plan a natural-language query without executing it."""
    with _client(server, config_file, data_dir) as client:
        resp = client.post("/plan", json={"query": query_text, "index_name": index_name})
        _fail_on_error(resp)
        body = resp.json()
    click.echo(json.dumps(body["plan"], indent=2, ensure_ascii=False))
    if show_rewrites and body["rewritten"]:
        click.echo("\n# after rewriting:")
        click.echo(json.dumps(body["rewritten_plan"], indent=2, ensure_ascii=False))
        click.echo("\n# compiled script:")
        click.echo(body["script"])
    if dump_plan:
        Path(dump_plan).write_text(json.dumps(body["plan"], indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        click.echo(f"plan written to {dump_plan}", err=True)


@main.command()
@click.option("--text", "query_text", required=True)
@click.option("--index", "index_name", required=True)
@click.option("--session", "session_id", default=None, help="Continue an existing session.")
@click.option("--dump-trace", "dump_trace", default=None, type=click.Path(), help="Write the run trace JSON to a file.")
@server_option
@config_option
@data_dir_option
def query(query_text: str, index_name: str, session_id: Optional[str], dump_trace: Optional[str], server: Optional[str], config_file: Optional[str], data_dir: Optional[str]) -> None:
    """Ask a question: plan, validate, rewrite, execute, answer."""
    with _client(server, config_file, data_dir) as client:
        if session_id is None:
            resp = client.post("/sessions", json={"index_name": index_name})
            _fail_on_error(resp)
            session_id = resp.json()["session_id"]
            click.echo(f"session: {session_id}", err=True)
        resp = client.post(f"/sessions/{session_id}/query", json={"text": query_text})
        _fail_on_error(resp)
        body = resp.json()
        click.echo(body["answer"]["text"])
        click.echo(f"trace: {body['trace_id']}", err=True)
        if dump_trace:
            trace = client.get(f"/traces/{body['trace_id']}")
            _fail_on_error(trace)
            Path(dump_trace).write_text(json.dumps(trace.json(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
            click.echo(f"trace written to {dump_trace}", err=True)


@main.command()
@click.argument("trace_id")
@click.option("--out", "out_file", default=None, type=click.Path())
@server_option
@config_option
@data_dir_option
def trace(trace_id: str, out_file: Optional[str], server: Optional[str], config_file: Optional[str], data_dir: Optional[str]) -> None:
    """Fetch a run trace."""
    with _client(server, config_file, data_dir) as client:
        resp = client.get(f"/traces/{trace_id}")
        _fail_on_error(resp)
        text = json.dumps(resp.json(), indent=2, ensure_ascii=False)
    if out_file:
        Path(out_file).write_text(text + "\n", encoding="utf-8")
        click.echo(f"trace written to {out_file}", err=True)
    else:
        click.echo(text)


@main.command()
@click.option("--question", required=True)
@click.option("--index", "index_name", default=None)
@click.option("--k", default=100, type=int)
@server_option
@config_option
@data_dir_option
def rag(question: str, index_name: Optional[str], k: int, server: Optional[str], config_file: Optional[str], data_dir: Optional[str]) -> None:
    """Answer with the RAG baseline (vector top-k chunks into one generation)."""
    body = {"question": question, "k": k}
    if index_name:
        body["index_name"] = index_name
    with _client(server, config_file, data_dir) as client:
        resp = client.post("/rag", json=body)
        _fail_on_error(resp)
        payload = resp.json()
    click.echo(payload["answer"])
    click.echo(f"retrieved {len(payload['retrieved_doc_ids'])} documents; "
               f"{payload['included_chunks']} chunks in context, {payload['truncated_chunks']} truncated", err=True)


@main.group()
def bench() -> None:
    """Synthetic benchmark corpus and the NL-analytics vs RAG comparison."""


@bench.command("generate")
@click.option("--seed", default=None, type=int, help="Corpus seed (defaults to the benchmark seed).")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--n-docs", default=100, type=int)
@click.option("--disclaimer", is_flag=True, help="Seed every report with the boilerplate disclaimer (context poisoning).")
def bench_generate(seed: Optional[int], out_dir: str, n_docs: int, disclaimer: bool) -> None:
    """Generate the synthetic corpus with its ground-truth answers."""
    from docflow.bench.corpus import DEFAULT_SEED, SyntheticCorpusSpec, generate

    spec = SyntheticCorpusSpec(
        n_docs=n_docs,
        seed=seed if seed is not None else DEFAULT_SEED,
        include_disclaimer=disclaimer,
    )
    incidents = generate(spec, out_dir)
    click.echo(f"wrote {len(incidents)} reports to {out_dir}/docs, ground truth to {out_dir}/ground_truth.json")


@bench.command("run")
@click.option("--engine", type=click.Choice(["luna", "rag", "both"]), default="both")
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True))
@click.option("--report", "report_file", default=None, type=click.Path())
@click.option("--index", "index_name", default=None)
@click.option("--k", default=100, type=int)
@server_option
@config_option
@data_dir_option
def bench_run(engine: str, corpus_dir: str, report_file: Optional[str], index_name: Optional[str], k: int, server: Optional[str], config_file: Optional[str], data_dir: Optional[str]) -> None:
    """Run the 30-question benchmark against the service."""
    from docflow.bench.corpus import BENCH_INDEX
    from docflow.bench.harness import render_comparison_table, render_report_table, run_benchmark

    index_name = index_name or BENCH_INDEX
    engines = ["luna", "rag"] if engine == "both" else [engine]
    reports = {}
    with _client(server, config_file, data_dir) as client:
        for eng in engines:
            reports[eng] = run_benchmark(client, corpus_dir, eng, index_name=index_name, k=k)
            click.echo(render_report_table(reports[eng]))
            click.echo("")
    if len(reports) == 2:
        click.echo(render_comparison_table(reports["luna"], reports["rag"]))
    if report_file:
        Path(report_file).write_text(json.dumps(reports, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        click.echo(f"report written to {report_file}", err=True)


if __name__ == "__main__":
    main()
