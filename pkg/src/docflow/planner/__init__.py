from docflow.planner.compile import CompiledPlan, CompileError, compile_plan, render_script
from docflow.planner.logical import LOGICAL_OPS, LogicalNode, LogicalPlan, plan_json_schema
from docflow.planner.planner import Planner, load_default_fewshot
from docflow.planner.rewrite import rewrite
from docflow.planner.validate import Violation, validate, validate_payload

__all__ = [
    "LOGICAL_OPS",
    "CompileError",
    "CompiledPlan",
    "LogicalNode",
    "LogicalPlan",
    "Planner",
    "Violation",
    "compile_plan",
    "load_default_fewshot",
    "plan_json_schema",
    "render_script",
    "rewrite",
    "validate",
    "validate_payload",
]
