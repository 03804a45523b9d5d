"""Exception hierarchy shared across the engine."""

from __future__ import annotations

from typing import Any, Optional


class DocflowError(Exception):
    """Base class for all engine errors."""


class ParseError(DocflowError):
    """Malformed input payload. Carries a byte offset or path when known."""

    def __init__(self, message: str, *, offset: Optional[int] = None, location: Optional[str] = None):
        self.offset = offset
        self.location = location
        suffix = ""
        if offset is not None:
            suffix = f" (at byte {offset})"
        elif location:
            suffix = f" (at {location})"
        super().__init__(message + suffix)


class SchemaError(DocflowError):
    """Payload violates a structural contract (e.g. unknown element label)."""


class PlanParamError(DocflowError):
    """Operator constructed with invalid parameters."""


class ExecutionError(DocflowError):
    """Operator failed mid-run. Names the operator and, when known, the document."""

    def __init__(self, message: str, *, operator_id: str, doc_id: Optional[str] = None):
        self.operator_id = operator_id
        self.doc_id = doc_id
        detail = f" [operator={operator_id}" + (f", doc={doc_id}]" if doc_id else "]")
        super().__init__(message + detail)


class AggregationError(ExecutionError):
    """Aggregate applied to an incompatible field value."""


class UnknownFieldError(DocflowError):
    def __init__(self, field: str, context: str = "index"):
        self.field = field
        super().__init__(f"unknown field {field!r} for {context}")


class ProviderError(DocflowError):
    """LLM provider transport failure."""

    def __init__(self, message: str, *, retryable: bool = True):
        self.retryable = retryable
        super().__init__(message)


class LlmValidationError(DocflowError):
    """Structured response still invalid after the configured retries."""

    def __init__(self, message: str, *, last_response: str, errors: list[str]):
        self.last_response = last_response
        self.errors = errors
        super().__init__(message)


class FixtureMissingError(DocflowError):
    """Scripted provider has no recording for the requested prompt."""


class IntegrityError(DocflowError):
    """Persisted content does not match its recorded hash."""


class PlanningError(DocflowError):
    """Planner could not produce a valid plan within the retry bound."""

    def __init__(self, message: str, *, last_plan: Optional[dict] = None, violations: Optional[list[Any]] = None):
        self.last_plan = last_plan
        self.violations = violations or []
        super().__init__(message)
