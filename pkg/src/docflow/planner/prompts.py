"""Planner prompt assembly: schema, operator catalog, few-shots, history."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from docflow.model.document import canonical_json
from docflow.model.schema import DocSetSchema

PLANNER_SYSTEM = """You translate an analyst's natural-language question over a document \
collection into a logical query plan. Respond with a single JSON object of the form \
{"nodes": [...], "result_node": "<id>"} that conforms to the provided plan schema. \
Each node has: id (unique string), op (one of the operators below), params, inputs \
(list of upstream node ids), and a one-line description of its intent. \
QueryDatabase and QueryVectorDatabase are the only source operators. Filter on indexed \
fields with QueryDatabase predicates when possible; use LlmFilter and LlmExtract for \
information that lives only in the document text. Finish aggregate questions with \
GroupByAggregate or Count; finish narrative questions with LlmGenerate."""

OPERATOR_CATALOG = """\
- QueryDatabase: scan an index. params: {"index": str, "filters": [predicate...]?, "keyword": str?}. \
Predicates: {"field", "op": "eq"|"in"|"range"|"prefix", "value"|"values"|"min"/"max"}. No inputs.
- QueryVectorDatabase: semantic search. params: {"index": str, "query_text": str, "k": int, "filters"?}. No inputs.
- LlmFilter: keep documents where an LLM answers true. params: {"question": str}. One input.
- LlmExtract: pull new fields out of each document's text. params: {"fields": [{"name", "dtype": "string"|"bool"|"int"|"float", "description"?}...]}. One input.
- BasicFilter: filter on already-present properties. params: {"expression": {...}} with ops and/or/not, ==, !=, <, <=, >, >=, in, contains, startswith over {"field": name} and {"const": value}. One input.
- GroupByAggregate: group and aggregate. params: {"group_fields": [str], "aggregation": "count"|"sum"|"min"|"max"|"avg", "agg_field"?}. Group fields may name information not yet extracted; it will be obtained at run time. One input.
- LlmCluster: k-means over the semantic similarity of a field. params: {"field": str, "k": int}. One input.
- LlmGenerate: produce a natural-language answer from the input documents. params: {"prompt": str}. One or more inputs.
- Limit: first n documents. params: {"n": int}. One input.
- Sort: order by a property. params: {"field": str, "descending"?: bool}. One input.
- Count: single count of the input documents. params: {}. One input."""


@dataclass
class PlannerPromptBundle:
    schema_section: str
    catalog_section: str
    fewshot_section: str
    history_section: str
    query: str

    def render_user(self) -> str:
        return (
            f"SCHEMA:\n{self.schema_section}\n\n"
            f"OPERATORS:\n{self.catalog_section}\n\n"
            f"EXAMPLES:\n{self.fewshot_section}\n\n"
            f"HISTORY:\n{self.history_section}\n\n"
            f"QUESTION:\n{self.query}"
        )


def render_schema_section(schema: DocSetSchema, index_name: Optional[str]) -> str:
    lines = []
    if index_name:
        lines.append(f"index: {index_name}")
    for f in schema.fields:
        samples = ", ".join(json.dumps(v, ensure_ascii=False) for v in f.sample_values[:5])
        desc = f" — {f.description}" if f.description else ""
        sample_part = f" (examples: {samples})" if samples else ""
        lines.append(f"- {f.name} ({f.dtype}){desc}{sample_part}")
    return "\n".join(lines)


def render_fewshot_section(examples: Sequence[dict]) -> str:
    if not examples:
        return "(none)"
    blocks = []
    for i, ex in enumerate(examples, 1):
        plan_json = canonical_json(ex["plan"]).decode("utf-8")
        blocks.append(f"Example {i}:\nQ: {ex['query']}\nPLAN: {plan_json}")
    return "\n\n".join(blocks)


def render_history_section(history: Sequence[dict]) -> str:
    if not history:
        return "(none)"
    blocks = []
    for i, turn in enumerate(history, 1):
        plan_json = canonical_json(turn["plan"]).decode("utf-8")
        blocks.append(f"Turn {i}:\nQ: {turn['query']}\nPLAN: {plan_json}\nANSWER: {turn.get('answer', '')}")
    return "\n\n".join(blocks)


def build_prompt_bundle(
    query: str,
    schema: DocSetSchema,
    fewshot: Sequence[dict] = (),
    history: Sequence[dict] = (),
    index_name: Optional[str] = None,
) -> PlannerPromptBundle:
    return PlannerPromptBundle(
        schema_section=render_schema_section(schema, index_name),
        catalog_section=OPERATOR_CATALOG,
        fewshot_section=render_fewshot_section(fewshot),
        history_section=render_history_section(history),
        query=query,
    )
