"""The NL→plan loop: prompt, validate, re-prompt with violations, bounded."""

from __future__ import annotations

import json
from importlib import resources
from typing import Any, Optional, Sequence

from docflow.errors import DocflowError, LlmValidationError, PlanningError
from docflow.llm.base import LlmClient, LlmRequest, extract_json_payload
from docflow.model.schema import DocSetSchema
from docflow.planner.logical import LogicalPlan, plan_json_schema
from docflow.planner.prompts import PLANNER_SYSTEM, build_prompt_bundle
from docflow.planner.validate import Violation, validate_payload


def load_default_fewshot() -> list[dict]:
    text = resources.files("docflow.planner").joinpath("data/fewshot.json").read_text(encoding="utf-8")
    return json.loads(text)["examples"]


class Planner:
    """Stateless given (query, schema, history); safe to share across threads."""

    def __init__(
        self,
        llm: LlmClient,
        fewshot: Optional[list[dict]] = None,
        retry_bound: int = 3,
    ) -> None:
        self.llm = llm
        self.fewshot = fewshot if fewshot is not None else load_default_fewshot()
        self.retry_bound = max(1, retry_bound)

    def build_prompts(
        self,
        query: str,
        schema: DocSetSchema,
        history: Sequence[dict] = (),
        index_name: Optional[str] = None,
    ) -> tuple[str, str]:
        bundle = build_prompt_bundle(query, schema, self.fewshot, history, index_name)
        return PLANNER_SYSTEM, bundle.render_user()

    def plan(
        self,
        query: str,
        schema: DocSetSchema,
        history: Sequence[dict] = (),
        index_name: Optional[str] = None,
    ) -> LogicalPlan:
        if not schema.fields:
            raise DocflowError("cannot plan against an empty schema")
        system, base_user = self.build_prompts(query, schema, history, index_name)

        all_errors: list[str] = []
        user = base_user
        payload: Any = None
        violations: list[Violation] = []
        for _attempt in range(self.retry_bound):
            request = LlmRequest(
                purpose="plan",
                system_prompt=system,
                user_prompt=user,
                response_format="json-with-schema",
                json_schema=plan_json_schema(),
            )
            try:
                payload = extract_json_payload(self.llm.complete(request, tag="planner"))
            except LlmValidationError as exc:
                raise PlanningError(
                    f"planner produced no schema-valid JSON: {exc}", last_plan=None, violations=[]
                )
            violations = validate_payload(payload, schema, index_name)
            if not violations:
                return LogicalPlan.from_dict(payload, query)
            # monotonic feedback: every re-prompt carries all prior violations
            all_errors.extend(f"[{v.node_id or 'plan'}] {v.message}" for v in violations)
            user = (
                base_user
                + "\n\nYour previous plan(s) failed validation with these problems:\n"
                + "\n".join(f"- {e}" for e in all_errors)
            )
        raise PlanningError(
            f"no valid plan after {self.retry_bound} attempts",
            last_plan=payload if isinstance(payload, dict) else None,
            violations=[v.to_dict() for v in violations],
        )
