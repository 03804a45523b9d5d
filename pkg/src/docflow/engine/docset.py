"""DocSets: lazy, immutable document collections defined by an operator plan.

No computation happens until an action (collect, count, take, write,
materialize) runs the plan through the executor. Every transformation returns
a new DocSet; the original stays valid.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence, Union

from docflow.checkpoint import MaterializeCheckpoint, write_documents
from docflow.engine.executor import ExecutionResult, Executor, RunContext
from docflow.engine.trace import new_run_id
from docflow.llm.base import LlmClient, Transcript
from docflow.llm.config import LlmConfig, ProviderRouter
from docflow.model.document import Document
from docflow.ops.physical import PhysicalOperator, PhysicalPlan
from docflow.store.index import IndexManager


class Context:
    """Engine handle: providers, store root, execution knobs."""

    def __init__(
        self,
        data_dir: Union[str, Path] = "./docflow_data",
        llm_config: Optional[LlmConfig] = None,
        router: Optional[ProviderRouter] = None,
        parallelism: int = 4,
        generate_budget: int = 8000,
        seed: int = 0,
        trace_dir: Optional[Union[str, Path]] = None,
        config_base_dir: Optional[Path] = None,
    ) -> None:
        self.data_dir = Path(data_dir)
        self.router = router or ProviderRouter(llm_config or LlmConfig(), config_base_dir)
        self.embedder = self.router.embedder
        self.stores = IndexManager(self.data_dir / "indexes", self.embedder)
        self.parallelism = parallelism
        self.generate_budget = generate_budget
        self.seed = seed
        self.trace_dir = Path(trace_dir) if trace_dir else None

    def new_llm_client(self) -> LlmClient:
        return LlmClient(self.router, Transcript(), retry_bound=self.router.config.retry_bound)

    def new_run(self, llm: Optional[LlmClient] = None) -> RunContext:
        return RunContext(
            llm=llm or self.new_llm_client(),
            embedder=self.embedder,
            stores=self.stores,
            data_dir=self.data_dir,
            parallelism=self.parallelism,
            generate_budget=self.generate_budget,
            seed=self.seed,
        )

    # -- DocSet constructors -------------------------------------------------

    def read_docparse(self, input_dir: Union[str, Path, None] = None, paths: Optional[Sequence[str]] = None) -> "DocSet":
        params: dict[str, Any] = {}
        if input_dir is not None:
            params["input_dir"] = str(input_dir)
        if paths is not None:
            params["paths"] = [str(p) for p in paths]
        return DocSet(PhysicalOperator("partition", params), self)

    def docset_from(self, docs: Iterable[Document]) -> "DocSet":
        """Materialize documents into a memory checkpoint and read from it."""
        name = f"inline-{new_run_id()}"
        write_documents(list(docs), name, "memory", str(self.data_dir))
        node = PhysicalOperator("materialize", {"name": name, "target": "memory", "read": True})
        return DocSet(node, self)

    def query_index(
        self,
        index: str,
        filters: Optional[list[dict]] = None,
        keyword: Optional[str] = None,
        limit: Optional[int] = None,
    ) -> "DocSet":
        params: dict[str, Any] = {"index": index}
        if filters:
            params["filters"] = filters
        if keyword:
            params["keyword"] = keyword
        if limit is not None:
            params["limit"] = limit
        return DocSet(PhysicalOperator("queryDatabase", params), self)

    def vector_query_index(self, index: str, query_text: str, k: int, filters: Optional[list[dict]] = None) -> "DocSet":
        params: dict[str, Any] = {"index": index, "query_text": query_text, "k": k}
        if filters:
            params["filters"] = filters
        return DocSet(PhysicalOperator("queryVectorDatabase", params), self)

    def resume_from(self, checkpoint: Union[MaterializeCheckpoint, str]) -> "DocSet":
        uri = checkpoint.uri if isinstance(checkpoint, MaterializeCheckpoint) else checkpoint
        node = PhysicalOperator("materialize", {"name": "resume", "target": "disk", "read": True, "uri": uri})
        return DocSet(node, self)


@dataclass(frozen=True)
class DocSet:
    plan: PhysicalOperator
    context: Context

    def _append(self, op_kind: str, params: dict) -> "DocSet":
        return DocSet(PhysicalOperator(op_kind, params, inputs=[self.plan]), self.context)

    # -- transformations (lazy) ----------------------------------------------

    def map(self, fn: Callable[[Document], Document]) -> "DocSet":
        return self._append("map", {"fn": fn})

    def filter(self, fn: Optional[Callable[[Document], bool]] = None, expression: Optional[dict] = None) -> "DocSet":
        params: dict[str, Any] = {}
        if fn is not None:
            params["fn"] = fn
        if expression is not None:
            params["expression"] = expression
        return self._append("filter", params)

    def flat_map(self, fn: Callable[[Document], Iterable[Document]]) -> "DocSet":
        return self._append("flatMap", {"fn": fn})

    def explode(self) -> "DocSet":
        return self._append("explode", {})

    def llm_extract(self, fields: list[dict], prompt: Optional[str] = None) -> "DocSet":
        params: dict[str, Any] = {"fields": fields}
        if prompt:
            params["prompt"] = prompt
        return self._append("llmExtract", params)

    def llm_filter(self, question: str) -> "DocSet":
        return self._append("llmFilter", {"question": question})

    def llm_reduce_by_key(self, keys: list[str], prompt: str, batch_size: Optional[int] = None) -> "DocSet":
        params: dict[str, Any] = {"keys": keys, "prompt": prompt}
        if batch_size:
            params["batch_size"] = batch_size
        return self._append("llmReduceByKey", params)

    def reduce_by_key(self, keys: list[str], agg: str, agg_field: Optional[str] = None) -> "DocSet":
        params: dict[str, Any] = {"keys": keys, "agg": agg}
        if agg_field:
            params["agg_field"] = agg_field
        return self._append("reduceByKey", params)

    def embed(self, field: Optional[str] = None) -> "DocSet":
        params: dict[str, Any] = {}
        if field:
            params["field"] = field
        return self._append("embed", params)

    def kmeans_cluster(self, field: str, k: int, use_existing_embeddings: bool = False) -> "DocSet":
        return self._append(
            "kMeansCluster", {"field": field, "k": k, "use_existing_embeddings": use_existing_embeddings}
        )

    def summarize_generate(self, question: str, budget_tokens: Optional[int] = None) -> "DocSet":
        params: dict[str, Any] = {"question": question}
        if budget_tokens:
            params["budget_tokens"] = budget_tokens
        return self._append("summarizeGenerate", params)

    def sort(self, field: str, descending: bool = False) -> "DocSet":
        return self._append("sort", {"field": field, "descending": descending})

    def limit(self, n: int) -> "DocSet":
        return self._append("take", {"n": n})

    # -- actions (eager) -------------------------------------------------------

    def execute(self, mode: str = "collect", n: Optional[int] = None) -> ExecutionResult:
        ctx = self.context.new_run()
        result = Executor(ctx).execute(PhysicalPlan(self.plan), mode, n)
        if self.context.trace_dir is not None:
            from docflow.engine.executor import write_trace_file

            write_trace_file(result.trace, self.context.trace_dir)
        return result

    def collect(self) -> list[Document]:
        return self.execute("collect").docs or []

    def take(self, n: int) -> list[Document]:
        return self.execute("take", n).docs or []

    def count(self) -> int:
        return self.execute("count").count or 0

    def write(self, index: str) -> dict:
        writer = self._append("write", {"index": index})
        return writer.execute("write").report or {}

    def materialize(self, name: str, target: str = "disk") -> MaterializeCheckpoint:
        node = self._append("materialize", {"name": name, "target": target})
        result = node.execute("collect")
        assert result.checkpoint is not None
        return result.checkpoint
