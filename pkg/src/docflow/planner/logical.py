"""Logical plans: the LLM-facing operator DAG, serializable as canonical JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Any, Optional

from docflow.errors import ParseError
from docflow.model.document import canonical_json

LOGICAL_OPS = (
    "QueryDatabase",
    "QueryVectorDatabase",
    "LlmFilter",
    "LlmExtract",
    "BasicFilter",
    "GroupByAggregate",
    "LlmCluster",
    "LlmGenerate",
    "Limit",
    "Sort",
    "Count",
)

SOURCE_LOGICAL_OPS = ("QueryDatabase", "QueryVectorDatabase")


@lru_cache(maxsize=1)
def plan_json_schema() -> dict:
    """The published JSON Schema for logical plans (shipped with the package)."""
    text = resources.files("docflow.planner").joinpath("data/plan_schema.json").read_text(encoding="utf-8")
    return json.loads(text)


@dataclass
class LogicalNode:
    id: str
    op: str
    params: dict = field(default_factory=dict)
    inputs: list[str] = field(default_factory=list)
    description: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "op": self.op,
            "params": self.params,
            "inputs": self.inputs,
            "description": self.description,
        }


@dataclass
class LogicalPlan:
    query: str
    nodes: list[LogicalNode]
    result_node: str

    def node(self, node_id: str) -> Optional[LogicalNode]:
        for n in self.nodes:
            if n.id == node_id:
                return n
        return None

    def consumers(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for n in self.nodes:
            for i in n.inputs:
                if i in out:
                    out[i].append(n.id)
        return out

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "result_node": self.result_node,
            "nodes": [n.to_dict() for n in self.nodes],
        }

    def to_canonical_json(self) -> str:
        return canonical_json(self.to_dict()).decode("utf-8")

    @staticmethod
    def from_dict(payload: dict, query: Optional[str] = None) -> "LogicalPlan":
        """Build a plan object from a payload that already passed syntactic
        validation. Raises ParseError on structurally unusable input."""
        if not isinstance(payload, dict) or not isinstance(payload.get("nodes"), list):
            raise ParseError("plan payload must be an object with a nodes list")
        nodes = []
        for i, raw in enumerate(payload["nodes"]):
            if not isinstance(raw, dict) or "id" not in raw or "op" not in raw:
                raise ParseError(f"plan node {i} missing id/op")
            nodes.append(
                LogicalNode(
                    id=str(raw["id"]),
                    op=str(raw["op"]),
                    params=dict(raw.get("params", {})),
                    inputs=[str(x) for x in raw.get("inputs", [])],
                    description=str(raw.get("description", "")),
                )
            )
        return LogicalPlan(
            query=query if query is not None else str(payload.get("query", "")),
            nodes=nodes,
            result_node=str(payload.get("result_node", "")),
        )

    @staticmethod
    def from_json(text: str | bytes, query: Optional[str] = None) -> "LogicalPlan":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid plan JSON: {exc.msg}", offset=exc.pos)
        return LogicalPlan.from_dict(payload, query)
