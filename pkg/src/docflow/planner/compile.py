"""Logical → physical compilation.

Every logical operator maps to one or more physical operators; the mapping is
total over the logical enum. A GroupByAggregate whose grouping or aggregation
field is not available upstream gets an llmExtract inserted to obtain it at
query time. The compiled plan is also rendered as a short script so a
technical user can read (and reason about) exactly what will run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from docflow.errors import DocflowError
from docflow.model.schema import DocSetSchema
from docflow.ops.physical import PhysicalOperator, PhysicalPlan
from docflow.planner.logical import LogicalNode, LogicalPlan


@dataclass
class CompiledPlan:
    physical: PhysicalPlan
    script: str
    node_map: dict[str, list[str]] = field(default_factory=dict)


class CompileError(DocflowError):
    def __init__(self, message: str, node_id: str):
        self.node_id = node_id
        super().__init__(f"{message} [node={node_id}]")


def _topo_from_result(plan: LogicalPlan) -> list[LogicalNode]:
    order: list[LogicalNode] = []
    seen: set[str] = set()

    def visit(node_id: str) -> None:
        if node_id in seen:
            return
        seen.add(node_id)
        node = plan.node(node_id)
        if node is None:
            raise CompileError(f"unknown node reference {node_id!r}", node_id)
        for ref in node.inputs:
            visit(ref)
        order.append(node)

    visit(plan.result_node)
    return order


def compile_plan(plan: LogicalPlan, schema: DocSetSchema) -> CompiledPlan:
    order = _topo_from_result(plan)
    compiled: dict[str, PhysicalOperator] = {}
    available: dict[str, set[str]] = {}
    node_map: dict[str, list[str]] = {}

    for node in order:
        upstream_ops = [compiled[i] for i in node.inputs]
        incoming: set[str] = set()
        for i in node.inputs:
            incoming |= available.get(i, set())
        ops: list[PhysicalOperator] = []
        p = node.params

        if node.op == "QueryDatabase":
            params = {"index": p["index"]}
            for key in ("filters", "keyword", "limit"):
                if p.get(key) is not None:
                    params[key] = p[key]
            ops.append(PhysicalOperator("queryDatabase", params))
            avail = set(schema.field_names())
        elif node.op == "QueryVectorDatabase":
            params = {"index": p["index"], "query_text": p["query_text"], "k": p["k"]}
            if p.get("filters"):
                params["filters"] = p["filters"]
            ops.append(PhysicalOperator("queryVectorDatabase", params))
            avail = set(schema.field_names())
        elif node.op == "LlmFilter":
            ops.append(PhysicalOperator("llmFilter", {"question": p["question"]}, inputs=upstream_ops))
            avail = incoming
        elif node.op == "LlmExtract":
            params = {"fields": p["fields"]}
            if p.get("prompt"):
                params["prompt"] = p["prompt"]
            ops.append(PhysicalOperator("llmExtract", params, inputs=upstream_ops))
            avail = incoming | {f["name"] for f in p["fields"]}
        elif node.op == "BasicFilter":
            ops.append(PhysicalOperator("filter", {"expression": p["expression"]}, inputs=upstream_ops))
            avail = incoming
        elif node.op == "GroupByAggregate":
            group_fields = list(p.get("group_fields", []))
            agg = p["aggregation"]
            agg_field = p.get("agg_field")
            needed = [f for f in group_fields + ([agg_field] if agg != "count" and agg_field else []) if f]
            missing = [f for f in needed if f.split(".")[0] not in incoming]
            current_inputs = upstream_ops
            if missing:
                descriptions = p.get("field_descriptions", {})
                extract_fields = []
                for name in missing:
                    dtype = "float" if (name == agg_field and agg in ("sum", "avg")) else "string"
                    extract_fields.append(
                        {"name": name, "dtype": dtype, "description": descriptions.get(name, f"value of {name} for this document")}
                    )
                extractor = PhysicalOperator("llmExtract", {"fields": extract_fields}, inputs=current_inputs)
                ops.append(extractor)
                current_inputs = [extractor]
            reduce_params = {"keys": group_fields, "agg": agg}
            if agg_field:
                reduce_params["agg_field"] = agg_field
            ops.append(PhysicalOperator("reduceByKey", reduce_params, inputs=current_inputs))
            avail = {g.split(".")[-1] for g in group_fields} | {agg}
        elif node.op == "LlmCluster":
            embedder = PhysicalOperator("embed", {"field": p["field"]}, inputs=upstream_ops)
            ops.append(embedder)
            ops.append(
                PhysicalOperator(
                    "kMeansCluster",
                    {"field": p["field"], "k": p["k"], "use_existing_embeddings": True},
                    inputs=[embedder],
                )
            )
            avail = incoming | {"cluster_id"}
        elif node.op == "LlmGenerate":
            ops.append(PhysicalOperator("summarizeGenerate", {"question": p["prompt"]}, inputs=upstream_ops))
            avail = {"included_count", "truncated_count"}
        elif node.op == "Limit":
            ops.append(PhysicalOperator("take", {"n": p["n"]}, inputs=upstream_ops))
            avail = incoming
        elif node.op == "Sort":
            ops.append(PhysicalOperator("sort", {"field": p["field"], "descending": bool(p.get("descending"))}, inputs=upstream_ops))
            avail = incoming
        elif node.op == "Count":
            ops.append(PhysicalOperator("count", {}, inputs=upstream_ops))
            avail = {"count"}
        else:
            raise CompileError(f"unsupported logical operator {node.op!r}", node.id)

        compiled[node.id] = ops[-1]
        available[node.id] = avail
        node_map[node.id] = [o.op_id for o in ops]

    physical = PhysicalPlan(compiled[plan.result_node])
    return CompiledPlan(physical=physical, script=render_script(plan, node_map), node_map=node_map)


def render_script(plan: LogicalPlan, node_map: Optional[dict[str, list[str]]] = None) -> str:
    """Readable script form of the compiled pipeline (display/editing aid)."""
    lines = [f"# query: {plan.query}"] if plan.query else []
    for node in _topo_from_result(plan):
        var = f"ds_{node.id}"
        p = node.params
        if node.op == "QueryDatabase":
            args = [json.dumps(p.get("index", ""))]
            if p.get("filters"):
                args.append(f"filters={json.dumps(p['filters'])}")
            if p.get("keyword"):
                args.append(f"keyword={json.dumps(p['keyword'])}")
            call = f"store.query_database({', '.join(args)})"
        elif node.op == "QueryVectorDatabase":
            call = f"store.query_vector_database({json.dumps(p['index'])}, {json.dumps(p['query_text'])}, k={p['k']})"
        else:
            src = ", ".join(f"ds_{i}" for i in node.inputs)
            if node.op == "LlmFilter":
                call = f"{src}.llm_filter({json.dumps(p['question'])})"
            elif node.op == "LlmExtract":
                fields = {f["name"]: f.get("dtype", "string") for f in p["fields"]}
                call = f"{src}.llm_extract({json.dumps(fields)})"
            elif node.op == "BasicFilter":
                call = f"{src}.filter(expression={json.dumps(p['expression'])})"
            elif node.op == "GroupByAggregate":
                agg = p["aggregation"]
                extra = f", agg_field={json.dumps(p['agg_field'])}" if p.get("agg_field") else ""
                call = f"{src}.group_by_aggregate({json.dumps(p.get('group_fields', []))}, agg={json.dumps(agg)}{extra})"
            elif node.op == "LlmCluster":
                call = f"{src}.embed(field={json.dumps(p['field'])}).kmeans_cluster({json.dumps(p['field'])}, k={p['k']})"
            elif node.op == "LlmGenerate":
                call = f"summarize_generate([{src}], {json.dumps(p['prompt'])})"
            elif node.op == "Limit":
                call = f"{src}.limit({p['n']})"
            elif node.op == "Sort":
                call = f"{src}.sort({json.dumps(p['field'])}, descending={bool(p.get('descending'))})"
            elif node.op == "Count":
                call = f"{src}.count_to_doc()"
            else:
                call = f"{src}  # {node.op}"
        comment = f"  # {node.description}" if node.description else ""
        lines.append(f"{var} = {call}{comment}")
    lines.append(f"result = ds_{plan.result_node}")
    return "\n".join(lines)
