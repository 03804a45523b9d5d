"""Plan validation: syntax, structure, and semantics against a DocSet schema.

Violations are data, not exceptions — the planner feeds them back to the LLM
and the service returns them as 422 bodies. Every violation names the node it
belongs to when one exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

from docflow.model.schema import DocSetSchema, TEXT_FIELD
from docflow.ops.expressions import field_references, validate_expression
from docflow.errors import SchemaError
from docflow.planner.logical import LOGICAL_OPS, LogicalPlan

PREDICATE_OPS = ("eq", "in", "range", "prefix")
AGGREGATIONS = ("count", "sum", "min", "max", "avg")
EXTRACT_DTYPES = ("string", "bool", "int", "float")


@dataclass
class Violation:
    code: str
    message: str
    node_id: Optional[str] = None
    field: Optional[str] = None

    def to_dict(self) -> dict:
        out = {"code": self.code, "message": self.message}
        if self.node_id is not None:
            out["node_id"] = self.node_id
        if self.field is not None:
            out["field"] = self.field
        return out


def _check_predicates(node_id: str, filters: Any, indexable: set[str]) -> list[Violation]:
    out: list[Violation] = []
    if not isinstance(filters, list):
        return [Violation("bad-params", "filters must be a list of predicates", node_id)]
    for pred in filters:
        if not isinstance(pred, dict) or not isinstance(pred.get("field"), str):
            out.append(Violation("bad-params", f"malformed predicate: {pred!r}", node_id))
            continue
        op = pred.get("op", "eq")
        if op not in PREDICATE_OPS:
            out.append(Violation("bad-params", f"unknown predicate op {op!r}", node_id, pred["field"]))
        elif op == "eq" and "value" not in pred:
            out.append(Violation("bad-params", "eq predicate requires value", node_id, pred["field"]))
        elif op == "in" and not isinstance(pred.get("values"), list):
            out.append(Violation("bad-params", "in predicate requires a values list", node_id, pred["field"]))
        elif op == "prefix" and not isinstance(pred.get("value"), str):
            out.append(Violation("bad-params", "prefix predicate requires a string value", node_id, pred["field"]))
        elif op == "range" and pred.get("min") is None and pred.get("max") is None:
            out.append(Violation("bad-params", "range predicate requires min and/or max", node_id, pred["field"]))
        if pred["field"] not in indexable:
            out.append(
                Violation(
                    "unknown-field",
                    f"field {pred['field']!r} is not in the index schema",
                    node_id,
                    pred["field"],
                )
            )
    return out


def _check_params(node_id: str, op: str, params: Any, indexable: set[str], index_name: Optional[str]) -> list[Violation]:
    out: list[Violation] = []
    if not isinstance(params, dict):
        return [Violation("bad-params", "params must be an object", node_id)]

    def need(key: str, types: tuple, label: str) -> Any:
        if key not in params or not isinstance(params[key], types):
            out.append(Violation("bad-params", f"{op} requires {label}", node_id, key))
            return None
        return params[key]

    if op in ("QueryDatabase", "QueryVectorDatabase"):
        name = need("index", (str,), "an index name")
        if name and index_name and name != index_name:
            out.append(Violation("unknown-index", f"plan references index {name!r}, expected {index_name!r}", node_id))
        if "filters" in params:
            out.extend(_check_predicates(node_id, params["filters"], indexable))
        if op == "QueryVectorDatabase":
            need("query_text", (str,), "query_text")
            k = need("k", (int,), "an integer k")
            if isinstance(k, int) and k < 1:
                out.append(Violation("bad-params", "k must be >= 1", node_id, "k"))
    elif op == "LlmFilter":
        q = need("question", (str,), "a question")
        if isinstance(q, str) and not q.strip():
            out.append(Violation("bad-params", "question must be non-empty", node_id, "question"))
    elif op == "LlmExtract":
        fields = need("fields", (list,), "a non-empty fields list")
        if isinstance(fields, list):
            if not fields:
                out.append(Violation("bad-params", "fields must be non-empty", node_id, "fields"))
            for f in fields:
                if not isinstance(f, dict) or not isinstance(f.get("name"), str) or not f["name"].isidentifier():
                    out.append(Violation("bad-params", f"field names must be identifiers: {f!r}", node_id))
                elif f.get("dtype", "string") not in EXTRACT_DTYPES:
                    out.append(Violation("bad-params", f"unsupported dtype {f.get('dtype')!r}", node_id, f["name"]))
    elif op == "BasicFilter":
        if "expression" not in params:
            out.append(Violation("bad-params", "BasicFilter requires an expression", node_id))
        else:
            try:
                validate_expression(params["expression"])
            except SchemaError as exc:
                out.append(Violation("bad-params", f"invalid expression: {exc}", node_id))
    elif op == "GroupByAggregate":
        gf = need("group_fields", (list,), "a group_fields list")
        if isinstance(gf, list) and not all(isinstance(g, str) and g for g in gf):
            out.append(Violation("bad-params", "group_fields must be non-empty strings", node_id))
        agg = need("aggregation", (str,), "an aggregation")
        if isinstance(agg, str) and agg not in AGGREGATIONS:
            out.append(Violation("bad-params", f"unknown aggregation {agg!r}", node_id, "aggregation"))
        if agg in ("sum", "min", "max", "avg") and not isinstance(params.get("agg_field"), str):
            out.append(Violation("bad-params", f"aggregation {agg!r} requires agg_field", node_id, "agg_field"))
    elif op == "LlmCluster":
        need("field", (str,), "a field")
        k = need("k", (int,), "an integer k")
        if isinstance(k, int) and k < 1:
            out.append(Violation("bad-params", "k must be >= 1", node_id, "k"))
    elif op == "LlmGenerate":
        need("prompt", (str,), "a prompt")
    elif op == "Limit":
        n = need("n", (int,), "an integer n")
        if isinstance(n, int) and n < 0:
            out.append(Violation("bad-params", "n must be >= 0", node_id, "n"))
    elif op == "Sort":
        need("field", (str,), "a field")
    elif op == "Count":
        pass
    return out


def validate_payload(
    payload: Any,
    schema: DocSetSchema,
    index_name: Optional[str] = None,
) -> list[Violation]:
    """Full validation of a raw plan payload. Empty result ⇔ valid."""
    if not isinstance(payload, dict):
        return [Violation("syntax", "plan must be a JSON object")]
    nodes = payload.get("nodes")
    if not isinstance(nodes, list) or not nodes:
        return [Violation("syntax", "plan must carry a non-empty nodes list")]

    violations: list[Violation] = []
    indexable = set(schema.field_names()) - {TEXT_FIELD}

    seen_ids: set[str] = set()
    node_ids: list[str] = []
    by_id: dict[str, dict] = {}
    for i, raw in enumerate(nodes):
        if not isinstance(raw, dict):
            violations.append(Violation("syntax", f"node {i} must be an object"))
            continue
        node_id = raw.get("id")
        if not isinstance(node_id, str) or not node_id:
            violations.append(Violation("syntax", f"node {i} missing id"))
            continue
        if node_id in seen_ids:
            violations.append(Violation("duplicate-id", f"node id {node_id!r} appears more than once", node_id))
            continue
        seen_ids.add(node_id)
        node_ids.append(node_id)
        by_id[node_id] = raw

        op = raw.get("op")
        if op not in LOGICAL_OPS:
            violations.append(Violation("unknown-op", f"unknown operator {op!r}", node_id))
            continue
        violations.extend(_check_params(node_id, op, raw.get("params", {}), indexable, index_name))

        inputs = raw.get("inputs", [])
        if not isinstance(inputs, list):
            violations.append(Violation("syntax", "inputs must be a list of node ids", node_id))
            inputs = []
        if op in ("QueryDatabase", "QueryVectorDatabase"):
            if inputs:
                violations.append(Violation("arity", f"{op} is a source and takes no inputs", node_id))
        elif op == "LlmGenerate":
            if len(inputs) < 1:
                violations.append(Violation("arity", "LlmGenerate requires at least one input", node_id))
        elif len(inputs) != 1:
            violations.append(Violation("arity", f"{op} requires exactly one input", node_id))

    result = payload.get("result_node")
    if not isinstance(result, str) or not result:
        violations.append(Violation("missing-result", "plan must name a result_node"))
    elif result not in by_id:
        violations.append(Violation("unknown-result", f"result_node {result!r} is not a node", result))

    # input references
    for node_id in node_ids:
        for ref in by_id[node_id].get("inputs", []) or []:
            if not isinstance(ref, str) or ref not in by_id:
                violations.append(Violation("unknown-input", f"input {ref!r} is not a node", node_id))

    # cycle detection
    order = _topo_order(node_ids, by_id)
    if order is None:
        violations.append(Violation("cycle", "plan graph contains a cycle"))
        return violations

    # reachability from the result node
    if isinstance(result, str) and result in by_id:
        reachable: set[str] = set()
        stack = [result]
        while stack:
            current = stack.pop()
            if current in reachable or current not in by_id:
                continue
            reachable.add(current)
            stack.extend(r for r in by_id[current].get("inputs", []) if isinstance(r, str))
        for node_id in node_ids:
            if node_id not in reachable:
                violations.append(Violation("unreachable", f"node {node_id!r} does not feed the result node", node_id))

    # semantic: dataflow-aware field resolution
    available: dict[str, set[str]] = {}
    for node_id in order:
        raw = by_id[node_id]
        op = raw.get("op")
        params = raw.get("params", {}) if isinstance(raw.get("params"), dict) else {}
        inputs = [r for r in raw.get("inputs", []) if isinstance(r, str) and r in available]
        incoming: set[str] = set()
        for r in inputs:
            incoming |= available[r]
        if op in ("QueryDatabase", "QueryVectorDatabase"):
            avail = set(schema.field_names())
        elif op == "LlmExtract":
            names = {f.get("name") for f in params.get("fields", []) if isinstance(f, dict) and isinstance(f.get("name"), str)}
            avail = incoming | names
        elif op == "GroupByAggregate":
            group_fields = [g for g in params.get("group_fields", []) if isinstance(g, str)]
            agg = params.get("aggregation", "count")
            avail = {g.split(".")[-1] for g in group_fields} | {agg if agg in AGGREGATIONS else "count"}
        elif op == "LlmCluster":
            if isinstance(params.get("field"), str) and params["field"] not in incoming:
                violations.append(
                    Violation("unknown-field", f"cluster field {params['field']!r} is not available here", node_id, params["field"])
                )
            avail = incoming | {"cluster_id"}
        elif op == "BasicFilter":
            expr = params.get("expression")
            if isinstance(expr, dict):
                for ref in field_references(expr):
                    root = ref.split(".")[0]
                    if root not in incoming:
                        violations.append(
                            Violation("unknown-field", f"filter references unavailable field {ref!r}", node_id, ref)
                        )
            avail = incoming
        elif op == "Sort":
            f = params.get("field")
            if isinstance(f, str) and f.split(".")[0] not in incoming:
                violations.append(Violation("unknown-field", f"sort field {f!r} is not available here", node_id, f))
            avail = incoming
        elif op == "LlmGenerate":
            avail = {"included_count", "truncated_count"}
        elif op == "Count":
            avail = {"count"}
        else:  # LlmFilter, Limit
            avail = incoming
        available[node_id] = avail

    return violations


def _topo_order(node_ids: list[str], by_id: dict[str, dict]) -> Optional[list[str]]:
    state: dict[str, int] = {}
    order: list[str] = []

    def visit(node_id: str) -> bool:
        if state.get(node_id) == 1:
            return True
        if state.get(node_id) == 0:
            return False
        state[node_id] = 0
        for ref in by_id.get(node_id, {}).get("inputs", []) or []:
            if isinstance(ref, str) and ref in by_id and not visit(ref):
                return False
        state[node_id] = 1
        order.append(node_id)
        return True

    for node_id in node_ids:
        if not visit(node_id):
            return None
    return order


def validate(plan: LogicalPlan, schema: DocSetSchema, index_name: Optional[str] = None) -> list[Violation]:
    return validate_payload(plan.to_dict(), schema, index_name)
