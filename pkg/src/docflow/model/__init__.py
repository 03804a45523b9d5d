from docflow.model.document import (
    BBox,
    Document,
    Element,
    ELEMENT_KINDS,
    canonical_json,
    deserialize_document,
    serialize_document,
)
from docflow.model.docparse import parse_docparse_json
from docflow.model.schema import DocSetSchema, SchemaField, TEXT_FIELD, classify_value, infer_schema

__all__ = [
    "BBox",
    "Document",
    "Element",
    "ELEMENT_KINDS",
    "DocSetSchema",
    "SchemaField",
    "TEXT_FIELD",
    "canonical_json",
    "classify_value",
    "deserialize_document",
    "infer_schema",
    "parse_docparse_json",
    "serialize_document",
]
