import pytest
from starlette.testclient import TestClient

from docflow.bench.corpus import BENCH_INDEX, SyntheticCorpusSpec, generate
from docflow.bench.questions import INGEST_FIELDS
from docflow.engine import Context
from docflow.service.app import ServiceConfig, create_app


@pytest.fixture(scope="session")
def bench_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    generate(SyntheticCorpusSpec(), out)
    return out


@pytest.fixture(scope="session")
def poisoned_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("poisoned-corpus")
    generate(SyntheticCorpusSpec(include_disclaimer=True), out)
    return out


@pytest.fixture(scope="session")
def bench_context(bench_corpus, tmp_path_factory) -> Context:
    ctx = Context(data_dir=tmp_path_factory.mktemp("engine-data"))
    ctx.read_docparse(bench_corpus / "docs").llm_extract(INGEST_FIELDS).explode().embed().write(BENCH_INDEX)
    return ctx


@pytest.fixture(scope="session")
def bench_index(bench_context):
    return bench_context.stores.open(BENCH_INDEX)


@pytest.fixture(scope="session")
def bench_schema(bench_index):
    return bench_index.schema


@pytest.fixture(scope="session")
def service_client(tmp_path_factory):
    config = ServiceConfig(data_dir=str(tmp_path_factory.mktemp("service-data")))
    return TestClient(create_app(config), raise_server_exceptions=False)


@pytest.fixture(scope="session")
def poisoned_client(tmp_path_factory):
    config = ServiceConfig(data_dir=str(tmp_path_factory.mktemp("poisoned-data")))
    return TestClient(create_app(config), raise_server_exceptions=False)


@pytest.fixture()
def ctx(tmp_path) -> Context:
    return Context(data_dir=tmp_path / "data")
