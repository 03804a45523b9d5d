"""Rule-based plan rewriting, applied to a fixpoint.

R1  merge consecutive LlmExtract nodes (one LLM call instead of two)
R2  push an index-expressible BasicFilter into its upstream QueryDatabase scan
R3  hoist Limit below order-preserving per-document LLM extraction
R4  drop no-op nodes (always-true filters, empty extracts)

Every rule preserves result equivalence; rewritten plans stay valid.
"""

from __future__ import annotations

from typing import Callable, Optional

from docflow.model.schema import DocSetSchema, TEXT_FIELD
from docflow.planner.logical import LogicalNode, LogicalPlan

MAX_PASSES = 20


def _clone(plan: LogicalPlan) -> LogicalPlan:
    return LogicalPlan.from_dict(plan.to_dict())


def _drop_node(plan: LogicalPlan, node_id: str, replacement: str) -> None:
    plan.nodes = [n for n in plan.nodes if n.id != node_id]
    for n in plan.nodes:
        n.inputs = [replacement if i == node_id else i for i in n.inputs]
    if plan.result_node == node_id:
        plan.result_node = replacement


def merge_llm_extracts(plan: LogicalPlan, _schema: Optional[DocSetSchema]) -> bool:
    consumers = plan.consumers()
    for node in plan.nodes:
        if node.op != "LlmExtract" or len(node.inputs) != 1:
            continue
        upstream = plan.node(node.inputs[0])
        if upstream is None or upstream.op != "LlmExtract":
            continue
        if consumers[upstream.id] != [node.id]:
            continue
        if node.params.get("prompt") or upstream.params.get("prompt"):
            continue  # custom prompts are not merged
        merged: dict[str, dict] = {f["name"]: f for f in upstream.params.get("fields", [])}
        for f in node.params.get("fields", []):
            merged[f["name"]] = f  # later extract wins on duplicate names
        upstream.params = {"fields": list(merged.values())}
        if node.description and node.description != upstream.description:
            upstream.description = "; ".join(p for p in (upstream.description, node.description) if p)
        _drop_node(plan, node.id, upstream.id)
        return True
    return False


def _expression_to_predicates(expr: dict, indexable: set[str]) -> Optional[list[dict]]:
    """Convert a conjunctive expression into scan predicates, or None."""
    op = expr.get("op")
    if op == "and":
        out: list[dict] = []
        for arg in expr["args"]:
            preds = _expression_to_predicates(arg, indexable)
            if preds is None:
                return None
            out.extend(preds)
        return out
    if op not in ("==", "in", "<", "<=", ">", ">=", "startswith"):
        return None
    left, right = expr.get("args", [None, None])
    if not (isinstance(left, dict) and "field" in left and isinstance(right, dict) and "const" in right):
        return None
    field, value = left["field"], right["const"]
    if field not in indexable:
        return None
    if op == "==":
        return [{"field": field, "op": "eq", "value": value}]
    if op == "in":
        if not isinstance(value, list):
            return None
        return [{"field": field, "op": "in", "values": value}]
    if op == "startswith":
        return [{"field": field, "op": "prefix", "value": value}]
    if op in ("<", "<="):
        return [{"field": field, "op": "range", "max": value, "max_exclusive": op == "<"}]
    return [{"field": field, "op": "range", "min": value, "min_exclusive": op == ">"}]


def pushdown_basic_filter(plan: LogicalPlan, schema: Optional[DocSetSchema]) -> bool:
    if schema is None:
        return False
    indexable = set(schema.field_names()) - {TEXT_FIELD}
    consumers = plan.consumers()
    for node in plan.nodes:
        if node.op != "BasicFilter" or len(node.inputs) != 1:
            continue
        upstream = plan.node(node.inputs[0])
        if upstream is None or upstream.op != "QueryDatabase":
            continue
        if consumers[upstream.id] != [node.id]:
            continue
        preds = _expression_to_predicates(node.params.get("expression", {}), indexable)
        if preds is None:
            continue
        upstream.params = dict(upstream.params)
        upstream.params["filters"] = list(upstream.params.get("filters", [])) + preds
        _drop_node(plan, node.id, upstream.id)
        return True
    return False


def hoist_limit(plan: LogicalPlan, _schema: Optional[DocSetSchema]) -> bool:
    """Run Limit before a per-document extract: same result, fewer LLM calls."""
    consumers = plan.consumers()
    for node in plan.nodes:
        if node.op != "Limit" or len(node.inputs) != 1:
            continue
        upstream = plan.node(node.inputs[0])
        if upstream is None or upstream.op != "LlmExtract":
            continue
        if consumers[upstream.id] != [node.id]:
            continue
        for n in plan.nodes:
            n.inputs = [upstream.id if i == node.id else i for i in n.inputs]
        if plan.result_node == node.id:
            plan.result_node = upstream.id
        node.inputs = list(upstream.inputs)
        upstream.inputs = [node.id]
        return True
    return False


def drop_noops(plan: LogicalPlan, _schema: Optional[DocSetSchema]) -> bool:
    for node in plan.nodes:
        if len(node.inputs) != 1:
            continue
        is_true_filter = node.op == "BasicFilter" and node.params.get("expression") == {"const": True}
        is_empty_extract = node.op == "LlmExtract" and node.params.get("fields") == []
        if is_true_filter or is_empty_extract:
            _drop_node(plan, node.id, node.inputs[0])
            return True
    return False


RULES: list[Callable[[LogicalPlan, Optional[DocSetSchema]], bool]] = [
    merge_llm_extracts,
    pushdown_basic_filter,
    hoist_limit,
    drop_noops,
]


def rewrite(plan: LogicalPlan, schema: Optional[DocSetSchema] = None) -> LogicalPlan:
    """Apply the rule set to a fixpoint; the input plan is left untouched."""
    current = _clone(plan)
    for _ in range(MAX_PASSES):
        if not any(rule(current, schema) for rule in RULES):
            break
    return current
