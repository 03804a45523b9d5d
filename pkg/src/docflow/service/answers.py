"""Turn execution results into answer payloads.

Answers carry both forms where applicable: structured rows and a rendered
text. The result node's logical operator decides the shape: Count and
ungrouped aggregates are scalars, grouped aggregates are tables, LlmGenerate
is text, anything else is a document list.
"""

from __future__ import annotations

import json
from typing import Optional

from docflow.model.document import Document
from docflow.planner.logical import LogicalNode

MAX_IDS_IN_TEXT = 50


def _public(properties: dict) -> dict:
    return {k: v for k, v in properties.items() if not k.startswith("_")}


def build_answer(result_node: Optional[LogicalNode], docs: list[Document]) -> dict:
    op = result_node.op if result_node else None

    if op == "Count":
        value = docs[0].properties.get("count", 0) if docs else 0
        return {"kind": "scalar", "text": str(value), "scalar": value, "rows": None, "doc_ids": None}

    if op == "GroupByAggregate":
        rows = [_public(d.properties) for d in docs]
        group_fields = result_node.params.get("group_fields", []) if result_node else []
        if not group_fields and len(rows) == 1:
            agg = result_node.params.get("aggregation", "count") if result_node else "count"
            value = rows[0].get(agg)
            return {"kind": "scalar", "text": str(value), "scalar": value, "rows": rows, "doc_ids": None}
        text = "\n".join(json.dumps(r, ensure_ascii=False, sort_keys=True) for r in rows)
        return {"kind": "table", "text": text, "scalar": None, "rows": rows, "doc_ids": None}

    if op == "LlmGenerate":
        text = docs[0].text_representation if docs and docs[0].text_representation else ""
        return {"kind": "text", "text": text, "scalar": None, "rows": None, "doc_ids": None}

    doc_ids = [d.doc_id for d in docs]
    rows = [{"doc_id": d.doc_id, **_public(d.properties)} for d in docs]
    shown = ", ".join(doc_ids[:MAX_IDS_IN_TEXT]) + ("…" if len(doc_ids) > MAX_IDS_IN_TEXT else "")
    text = f"{len(doc_ids)} matching documents" + (f": {shown}" if doc_ids else "")
    return {"kind": "docs", "text": text, "scalar": None, "rows": rows, "doc_ids": doc_ids}
