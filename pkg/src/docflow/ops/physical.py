"""Physical operator DAG: node definitions and parameter validation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Optional

from docflow.errors import PlanParamError
from docflow.ops.expressions import validate_expression

OP_KINDS = frozenset(
    {
        "queryDatabase",
        "queryVectorDatabase",
        "map",
        "filter",
        "flatMap",
        "partition",
        "explode",
        "reduceByKey",
        "sort",
        "write",
        "llmFilter",
        "llmExtract",
        "llmReduceByKey",
        "embed",
        "materialize",
        "take",
        "count",
        "kMeansCluster",
        "summarizeGenerate",
    }
)

SOURCE_OPS = frozenset({"queryDatabase", "queryVectorDatabase", "partition"})
BARRIER_OPS = frozenset({"reduceByKey", "llmReduceByKey", "sort", "kMeansCluster", "summarizeGenerate", "count", "write"})

AGGREGATIONS = ("count", "sum", "min", "max", "avg", "collect")

EXTRACT_DTYPES = ("string", "bool", "int", "float")

_id_counter = itertools.count(1)


def _require(params: dict, key: str, types: tuple, kind: str) -> Any:
    if key not in params:
        raise PlanParamError(f"{kind}: missing required parameter {key!r}")
    if not isinstance(params[key], types):
        raise PlanParamError(f"{kind}: parameter {key!r} must be {'/'.join(t.__name__ for t in types)}")
    return params[key]


def validate_extract_fields(fields: Any, kind: str = "llmExtract") -> None:
    if not isinstance(fields, list) or not fields:
        raise PlanParamError(f"{kind}: fields must be a non-empty list")
    for f in fields:
        if not isinstance(f, dict) or not f.get("name") or not str(f["name"]).isidentifier():
            raise PlanParamError(f"{kind}: field names must be valid identifiers, got {f!r}")
        if f.get("dtype", "string") not in EXTRACT_DTYPES:
            raise PlanParamError(f"{kind}: field {f['name']!r} has unsupported dtype {f.get('dtype')!r}")


def validate_op_params(op_kind: str, params: dict) -> None:
    if op_kind not in OP_KINDS:
        raise PlanParamError(f"unknown physical operator kind: {op_kind!r}")
    if op_kind == "queryDatabase":
        _require(params, "index", (str,), op_kind)
        if "filters" in params and not isinstance(params["filters"], list):
            raise PlanParamError("queryDatabase: filters must be a list")
    elif op_kind == "queryVectorDatabase":
        _require(params, "index", (str,), op_kind)
        _require(params, "query_text", (str,), op_kind)
        k = _require(params, "k", (int,), op_kind)
        if k < 1:
            raise PlanParamError("queryVectorDatabase: k must be >= 1")
    elif op_kind in ("map", "filter", "flatMap"):
        if "fn" not in params and "expression" not in params:
            raise PlanParamError(f"{op_kind}: requires fn (library mode) or expression")
        if "expression" in params:
            validate_expression(params["expression"])
        elif not callable(params["fn"]):
            raise PlanParamError(f"{op_kind}: fn must be callable")
    elif op_kind == "partition":
        if not params.get("input_dir") and not params.get("paths"):
            raise PlanParamError("partition: requires input_dir or paths")
    elif op_kind == "reduceByKey":
        keys = _require(params, "keys", (list,), op_kind)
        if not all(isinstance(k, str) for k in keys):
            raise PlanParamError("reduceByKey: keys must be property path strings")
        agg = _require(params, "agg", (str,), op_kind)
        if agg not in AGGREGATIONS:
            raise PlanParamError(f"reduceByKey: unknown aggregation {agg!r}")
        if agg in ("sum", "min", "max", "avg") and not params.get("agg_field"):
            raise PlanParamError(f"reduceByKey: aggregation {agg!r} requires agg_field")
    elif op_kind == "sort":
        _require(params, "field", (str,), op_kind)
    elif op_kind == "write":
        _require(params, "index", (str,), op_kind)
    elif op_kind == "llmFilter":
        q = _require(params, "question", (str,), op_kind)
        if not q.strip():
            raise PlanParamError("llmFilter: question must be non-empty")
    elif op_kind == "llmExtract":
        validate_extract_fields(params.get("fields"))
    elif op_kind == "llmReduceByKey":
        _require(params, "keys", (list,), op_kind)
        _require(params, "prompt", (str,), op_kind)
        if params.get("batch_size") is not None and params["batch_size"] < 2:
            raise PlanParamError("llmReduceByKey: batch_size must be >= 2")
    elif op_kind == "take":
        n = _require(params, "n", (int,), op_kind)
        if n < 0:
            raise PlanParamError("take: n must be >= 0")
    elif op_kind == "kMeansCluster":
        k = _require(params, "k", (int,), op_kind)
        if k < 1:
            raise PlanParamError("kMeansCluster: k must be >= 1")
        _require(params, "field", (str,), op_kind)
    elif op_kind == "summarizeGenerate":
        _require(params, "question", (str,), op_kind)
    elif op_kind == "materialize":
        _require(params, "name", (str,), op_kind)
        if params.get("target", "disk") not in ("memory", "disk") and "://" not in str(params.get("target")):
            raise PlanParamError("materialize: target must be memory, disk, or a storage URI")


@dataclass
class PhysicalOperator:
    op_kind: str
    params: dict = field(default_factory=dict)
    inputs: list["PhysicalOperator"] = field(default_factory=list)
    op_id: str = ""

    def __post_init__(self) -> None:
        validate_op_params(self.op_kind, self.params)
        if not self.op_id:
            self.op_id = f"op{next(_id_counter)}"
        if self.op_kind in SOURCE_OPS and self.inputs:
            raise PlanParamError(f"{self.op_kind} is a source and takes no inputs")

    def describe_params(self) -> dict:
        """JSON-safe parameter view (callables elided)."""
        out = {}
        for k, v in self.params.items():
            out[k] = f"<callable {getattr(v, '__name__', 'fn')}>" if callable(v) else v
        return out


@dataclass
class PhysicalPlan:
    result: PhysicalOperator

    def nodes(self) -> list[PhysicalOperator]:
        """Topological order (inputs before consumers); raises on cycles."""
        order: list[PhysicalOperator] = []
        state: dict[int, int] = {}  # 0 visiting, 1 done

        def visit(node: PhysicalOperator, stack: tuple[str, ...]) -> None:
            key = id(node)
            if state.get(key) == 1:
                return
            if state.get(key) == 0:
                raise PlanParamError(f"physical plan contains a cycle through {node.op_id}")
            state[key] = 0
            for upstream in node.inputs:
                visit(upstream, stack + (node.op_id,))
            state[key] = 1
            order.append(node)

        visit(self.result, ())
        return order

    def to_dict(self) -> dict:
        return {
            "result": self.result.op_id,
            "nodes": [
                {
                    "op_id": n.op_id,
                    "op_kind": n.op_kind,
                    "params": n.describe_params(),
                    "inputs": [i.op_id for i in n.inputs],
                }
                for n in self.nodes()
            ],
        }


def coerce_value(value: Any, dtype: str) -> Any:
    """Coerce an extracted value to the declared dtype; raises ValueError."""
    if value is None:
        raise ValueError("missing value")
    if dtype == "string":
        if isinstance(value, (dict, list)):
            raise ValueError(f"cannot treat {type(value).__name__} as string")
        return value if isinstance(value, str) else str(value)
    if dtype == "bool":
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.strip().lower() in ("true", "false"):
            return value.strip().lower() == "true"
        raise ValueError(f"cannot coerce {value!r} to bool")
    if dtype == "int":
        if isinstance(value, bool):
            raise ValueError("bool is not an int")
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        if isinstance(value, str):
            return int(value.strip())
        raise ValueError(f"cannot coerce {value!r} to int")
    if dtype == "float":
        if isinstance(value, bool):
            raise ValueError("bool is not a float")
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, str):
            return float(value.strip())
        raise ValueError(f"cannot coerce {value!r} to float")
    raise ValueError(f"unknown dtype {dtype!r}")
