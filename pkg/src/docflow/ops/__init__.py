from docflow.ops.cluster import kmeans_cosine
from docflow.ops.expressions import evaluate, field_references, validate_expression
from docflow.ops.physical import (
    AGGREGATIONS,
    BARRIER_OPS,
    OP_KINDS,
    SOURCE_OPS,
    PhysicalOperator,
    PhysicalPlan,
    coerce_value,
    validate_op_params,
)

__all__ = [
    "AGGREGATIONS",
    "BARRIER_OPS",
    "OP_KINDS",
    "SOURCE_OPS",
    "PhysicalOperator",
    "PhysicalPlan",
    "coerce_value",
    "evaluate",
    "field_references",
    "kmeans_cosine",
    "validate_expression",
    "validate_op_params",
]
