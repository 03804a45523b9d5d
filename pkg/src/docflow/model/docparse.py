"""Parser for the ingestion JSON produced by a layout-segmentation service.

Contract: top-level ``{"elements": [...]}``; each element carries ``type``
(one of the 11 labels), optional ``bbox`` ``[x1,y1,x2,y2]`` with
``page_number``, ``text_representation``, ``properties``, an optional
``table`` payload (rows/cols/cells), and optional ``binary_b64``. A tolerant
extension: an optional top-level ``properties`` object becomes the parent
document's properties.
"""

from __future__ import annotations

import base64
import hashlib
import json
from typing import Optional

from docflow.errors import ParseError, SchemaError
from docflow.model.document import BBox, Document, Element, ELEMENT_KINDS


def _element_from_payload(idx: int, payload: dict) -> Element:
    label = payload.get("type")
    if label not in ELEMENT_KINDS:
        raise SchemaError(f"unknown element label: {label!r}")

    bbox: Optional[BBox] = None
    if payload.get("bbox") is not None:
        coords = payload["bbox"]
        if not (isinstance(coords, list) and len(coords) == 4):
            raise ParseError("bbox must be a list of four coordinates", location=f"elements[{idx}].bbox")
        bbox = BBox(int(payload.get("page_number", 0)), *[float(c) for c in coords])

    properties = dict(payload.get("properties", {}))
    type_specific: Optional[dict] = None
    if label == "table":
        table = payload.get("table")
        if not isinstance(table, dict):
            raise ParseError("table element missing table payload", location=f"elements[{idx}]")
        type_specific = {
            "rows": table.get("rows"),
            "cols": table.get("cols"),
            "cells": [
                {
                    "row": c.get("row"),
                    "col": c.get("col"),
                    "row_span": c.get("row_span", 1),
                    "col_span": c.get("col_span", 1),
                    "text": c.get("text", ""),
                }
                for c in table.get("cells", [])
            ],
        }
    elif label == "picture":
        type_specific = {
            "format": properties.get("format", "unknown"),
            "resolution": properties.get("resolution"),
        }

    binary = None
    if payload.get("binary_b64"):
        try:
            binary = base64.b64decode(payload["binary_b64"])
        except (ValueError, TypeError) as exc:
            raise ParseError(f"invalid binary_b64: {exc}", location=f"elements[{idx}]")

    return Element(
        element_id=f"e{idx:04d}",
        kind=label,
        text_representation=payload.get("text_representation"),
        binary=binary,
        bbox=bbox,
        properties=properties,
        type_specific=type_specific,
    )


def parse_docparse_json(raw: bytes, *, doc_id: Optional[str] = None) -> Document:
    """Parse one ingestion payload into a Document with elements in reading order.

    The parent's text representation is the newline join of element texts;
    its lineage is the singleton of its own id.
    """
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed ingestion JSON: {exc.msg}", offset=exc.pos)
    if not isinstance(payload, dict) or not isinstance(payload.get("elements"), list):
        raise ParseError('ingestion payload must be an object with an "elements" list')

    elements = [_element_from_payload(i, e) for i, e in enumerate(payload["elements"])]
    if doc_id is None:
        doc_id = "doc-" + hashlib.sha256(raw).hexdigest()[:16]

    text = "\n".join(e.text_representation for e in elements if e.text_representation is not None)
    return Document(
        doc_id=doc_id,
        content=text,
        children=elements,
        properties=dict(payload.get("properties", {})),
        lineage=frozenset({doc_id}),
    )
