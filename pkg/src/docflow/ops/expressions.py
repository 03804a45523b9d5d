"""Safe expression subset for filters crossing the service boundary.

Expressions are JSON ASTs — comparisons, boolean combinators, and arithmetic
over document properties. No user code is ever evaluated.

    {"field": "windSpeedKnots"}            property reference (dotted paths ok)
    {"const": 10}                          literal
    {"op": ">", "args": [expr, expr]}      comparison / arithmetic / boolean
"""

from __future__ import annotations

from typing import Any, Iterator

from docflow.errors import SchemaError

BOOL_OPS = {"and", "or", "not"}
CMP_OPS = {"==", "!=", "<", "<=", ">", ">=", "in", "contains", "startswith"}
ARITH_OPS = {"+", "-", "*", "/"}


def resolve_path(properties: dict, path: str) -> Any:
    node: Any = properties
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            return None
        node = node[part]
    return node


def validate_expression(expr: Any) -> None:
    """Structural check; raises SchemaError on malformed nodes."""
    if not isinstance(expr, dict):
        raise SchemaError(f"expression node must be an object, got {type(expr).__name__}")
    if "field" in expr:
        if not isinstance(expr["field"], str) or not expr["field"]:
            raise SchemaError("field reference must be a non-empty string")
        return
    if "const" in expr:
        return
    op = expr.get("op")
    if op not in BOOL_OPS | CMP_OPS | ARITH_OPS:
        raise SchemaError(f"unknown expression operator: {op!r}")
    args = expr.get("args")
    if not isinstance(args, list) or not args:
        raise SchemaError(f"operator {op!r} requires an args list")
    if op == "not" and len(args) != 1:
        raise SchemaError("'not' takes exactly one argument")
    if op in CMP_OPS | ARITH_OPS and len(args) != 2:
        raise SchemaError(f"operator {op!r} takes exactly two arguments")
    for a in args:
        validate_expression(a)


def field_references(expr: dict) -> Iterator[str]:
    if "field" in expr:
        yield expr["field"]
    for a in expr.get("args", []) or []:
        yield from field_references(a)


def evaluate(expr: dict, properties: dict) -> Any:
    """Evaluate against a property map. Ordered comparisons with None or
    mismatched types are False rather than errors."""
    if "field" in expr:
        return resolve_path(properties, expr["field"])
    if "const" in expr:
        return expr["const"]

    op = expr["op"]
    if op == "and":
        return all(bool(evaluate(a, properties)) for a in expr["args"])
    if op == "or":
        return any(bool(evaluate(a, properties)) for a in expr["args"])
    if op == "not":
        return not bool(evaluate(expr["args"][0], properties))

    left = evaluate(expr["args"][0], properties)
    right = evaluate(expr["args"][1], properties)

    if op == "==":
        return left == right
    if op == "!=":
        return left != right
    if op == "in":
        return isinstance(right, (list, tuple, str)) and left in right
    if op == "contains":
        return isinstance(left, (list, tuple, str)) and right in left
    if op == "startswith":
        return isinstance(left, str) and isinstance(right, str) and left.startswith(right)
    if op in ("<", "<=", ">", ">="):
        try:
            if op == "<":
                return left < right
            if op == "<=":
                return left <= right
            if op == ">":
                return left > right
            return left >= right
        except TypeError:
            return False
    # arithmetic
    try:
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            return left / right if right else None
    except TypeError:
        return None
    raise SchemaError(f"unknown expression operator: {op!r}")


TRUE_EXPR = {"const": True}
