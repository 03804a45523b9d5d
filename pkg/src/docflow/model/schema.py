"""DocSet schema: the planner's (and store's) view of document properties."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

from docflow.errors import DocflowError
from docflow.model.document import Document

DTYPES = ("string", "bool", "int", "float", "datetime", "list")

TEXT_FIELD = "text_representation"

_ISO_DATETIME = re.compile(r"^\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2})?)?$")


def classify_value(value: Any) -> str:
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "float"
    if isinstance(value, (list, tuple)):
        return "list"
    if isinstance(value, str) and _ISO_DATETIME.match(value):
        return "datetime"
    return "string"


@dataclass
class SchemaField:
    name: str
    dtype: str
    description: str = ""
    sample_values: list[Any] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dtype": self.dtype,
            "description": self.description,
            "sample_values": self.sample_values,
        }

    @staticmethod
    def from_dict(d: dict) -> "SchemaField":
        return SchemaField(d["name"], d["dtype"], d.get("description", ""), list(d.get("sample_values", [])))


@dataclass
class DocSetSchema:
    """Ordered field descriptors plus the whole-document text field."""

    fields: list[SchemaField] = field(default_factory=list)
    has_text_representation: bool = True

    def __post_init__(self) -> None:
        names = [f.name for f in self.fields]
        if len(names) != len(set(names)):
            raise DocflowError("schema field names must be unique")
        if TEXT_FIELD not in names:
            self.fields.append(
                SchemaField(TEXT_FIELD, "string", "entire text content of the document")
            )

    def field_names(self) -> list[str]:
        return [f.name for f in self.fields]

    def get(self, name: str) -> Optional[SchemaField]:
        for f in self.fields:
            if f.name == name:
                return f
        return None

    def to_dict(self) -> dict:
        return {
            "fields": [f.to_dict() for f in self.fields],
            "has_text_representation": self.has_text_representation,
        }

    @staticmethod
    def from_dict(d: dict) -> "DocSetSchema":
        return DocSetSchema(fields=[SchemaField.from_dict(f) for f in d.get("fields", [])])


def infer_schema(docs: Sequence[Document] | Iterable[Document], max_samples: int = 100) -> DocSetSchema:
    """Infer a schema from a sample of documents.

    Field order is first-seen order; dtype is the majority of observed value
    types (first-seen wins ties); up to 5 distinct dtype-conforming sample
    values are kept per field. Pure function of the input sequence.
    """
    sample = list(docs)[:max_samples]
    if not sample:
        raise DocflowError("cannot infer a schema from an empty sample")

    order: list[str] = []
    type_counts: dict[str, dict[str, int]] = {}
    first_seen_type: dict[str, str] = {}
    samples: dict[str, list[Any]] = {}

    for doc in sample:
        for key, value in doc.properties.items():
            if key.startswith("_"):
                continue  # internal markers (extraction errors, ordinals)
            if key not in type_counts:
                order.append(key)
                type_counts[key] = {}
                samples[key] = []
            dtype = classify_value(value)
            first_seen_type.setdefault(key, dtype)
            type_counts[key][dtype] = type_counts[key].get(dtype, 0) + 1
            samples[key].append(value)

    fields: list[SchemaField] = []
    for key in order:
        counts = type_counts[key]
        best = max(counts.items(), key=lambda kv: (kv[1], kv[0] == first_seen_type[key]))[0]
        description = ""
        if len(counts) > 1:
            seen = ", ".join(f"{t} ({n})" for t, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))
            description = f"mixed value types observed: {seen}"
        distinct: list[Any] = []
        for v in samples[key]:
            if classify_value(v) != best or v in distinct:
                continue
            distinct.append(v)
            if len(distinct) == 5:
                break
        fields.append(SchemaField(key, best, description, distinct))

    return DocSetSchema(fields=fields)
