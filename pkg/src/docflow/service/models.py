"""Request/response models for the REST service."""

from __future__ import annotations

from typing import Any, Optional, Union

from pydantic import BaseModel, Field


class SessionCreateRequest(BaseModel):
    index_name: str


class SessionCreateResponse(BaseModel):
    session_id: str
    index_name: str


class QueryRequest(BaseModel):
    text: str = Field(min_length=1)


class PlanEditRequest(BaseModel):
    plan: dict


class PlanRequest(BaseModel):
    query: str = Field(min_length=1)
    index_name: str


class RagRequest(BaseModel):
    question: str = Field(min_length=1)
    k: int = Field(default=100, ge=1)
    index_name: Optional[str] = None


class IngestRequest(BaseModel):
    input_dir: str
    extract_fields: Optional[list[dict]] = None
    doc_id_from: str = "filename"


class AnswerModel(BaseModel):
    kind: str  # scalar | table | docs | text
    text: str
    scalar: Optional[Union[int, float, str]] = None
    rows: Optional[list[dict]] = None
    doc_ids: Optional[list[str]] = None


class QueryResponse(BaseModel):
    session_id: str
    turn_index: int
    plan: dict
    rewritten_plan: dict
    script: str
    answer: AnswerModel
    trace_id: str
    edited: bool = False


class PlanResponse(BaseModel):
    plan: dict
    rewritten_plan: dict
    script: str
    rewritten: bool


class RagResponse(BaseModel):
    answer: str
    retrieved_doc_ids: list[str]
    included_chunks: int
    truncated_chunks: int


class IngestResponse(BaseModel):
    report: dict


class IndexListResponse(BaseModel):
    indexes: list[str]


class ErrorDetail(BaseModel):
    error: str
    operator_id: Optional[str] = None
    violations: Optional[list[dict]] = None
