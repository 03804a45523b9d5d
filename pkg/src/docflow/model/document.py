"""Hierarchical document model.

A document is a tree: the root carries content, properties, and provenance;
its children are typed elements (text blocks, tables, pictures, ...) in
reading order. Everything is JSON-serializable so plans, traces, and
checkpoints can externalize documents losslessly.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Optional, Union

from docflow.errors import ParseError, SchemaError

# DocLayNet class set; the segmentation contract upstream of ingestion.
ELEMENT_KINDS = frozenset(
    {
        "caption",
        "footnote",
        "formula",
        "list-item",
        "page-footer",
        "page-header",
        "picture",
        "section-header",
        "table",
        "text",
        "title",
    }
)


@dataclass(frozen=True)
class BBox:
    """Page index plus normalized [0,1] page-fraction coordinates."""

    page: int
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.x1 <= self.x2 <= 1.0 and 0.0 <= self.y1 <= self.y2 <= 1.0):
            raise SchemaError(f"bbox coordinates out of range: {(self.x1, self.y1, self.x2, self.y2)}")

    def to_list(self) -> list:
        return [self.x1, self.y1, self.x2, self.y2]


def _check_table_payload(type_specific: dict) -> None:
    rows = type_specific.get("rows")
    cols = type_specific.get("cols")
    cells = type_specific.get("cells")
    if not isinstance(rows, int) or not isinstance(cols, int) or rows < 1 or cols < 1:
        raise SchemaError("table element requires positive integer rows and cols")
    if not isinstance(cells, list):
        raise SchemaError("table element requires a cell list")
    covered = [[0] * cols for _ in range(rows)]
    for cell in cells:
        r, c = cell["row"], cell["col"]
        rs, cs = cell.get("row_span", 1), cell.get("col_span", 1)
        if r < 0 or c < 0 or rs < 1 or cs < 1 or r + rs > rows or c + cs > cols:
            raise SchemaError(f"table cell out of bounds: {cell}")
        for i in range(r, r + rs):
            for j in range(c, c + cs):
                covered[i][j] += 1
    if any(v != 1 for row in covered for v in row):
        raise SchemaError("table cells must tile the grid exactly once")


@dataclass
class Element:
    """Leaf node of a document tree: one typed chunk of the source document."""

    element_id: str
    kind: str
    text_representation: Optional[str] = None
    binary: Optional[bytes] = None
    bbox: Optional[BBox] = None
    properties: dict[str, Any] = field(default_factory=dict)
    type_specific: Optional[dict] = None

    def __post_init__(self) -> None:
        if self.kind not in ELEMENT_KINDS:
            raise SchemaError(f"unknown element label: {self.kind!r}")
        if self.kind == "table":
            if not self.type_specific:
                raise SchemaError("table element requires rows/cols/cells payload")
            _check_table_payload(self.type_specific)
        if self.kind == "picture" and self.type_specific is None:
            # format/resolution may be unknown at parse time but the slot must exist
            self.type_specific = {"format": "unknown", "resolution": None}

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"element_id": self.element_id, "kind": self.kind}
        if self.text_representation is not None:
            d["text_representation"] = self.text_representation
        if self.binary is not None:
            d["binary_b64"] = base64.b64encode(self.binary).decode("ascii")
        if self.bbox is not None:
            d["bbox"] = {"page": self.bbox.page, "coords": self.bbox.to_list()}
        if self.properties:
            d["properties"] = self.properties
        if self.type_specific is not None:
            d["type_specific"] = self.type_specific
        return d

    @staticmethod
    def from_dict(d: dict) -> "Element":
        try:
            bbox = None
            if "bbox" in d:
                coords = d["bbox"]["coords"]
                bbox = BBox(d["bbox"]["page"], *coords)
            binary = base64.b64decode(d["binary_b64"]) if "binary_b64" in d else None
            return Element(
                element_id=d["element_id"],
                kind=d["kind"],
                text_representation=d.get("text_representation"),
                binary=binary,
                bbox=bbox,
                properties=dict(d.get("properties", {})),
                type_specific=d.get("type_specific"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"corrupt element payload: {exc}", location=str(d.get("element_id", "?")))


@dataclass
class Document:
    """A tree-shaped record: content, ordered child elements, properties, lineage.

    Documents are treated as immutable once constructed; transforms build new
    instances via :meth:`evolve` rather than mutating in place.
    """

    doc_id: str
    content: Union[str, bytes, None] = None
    children: list[Element] = field(default_factory=list)
    properties: dict[str, Any] = field(default_factory=dict)
    lineage: frozenset[str] = field(default_factory=frozenset)
    embedding: Optional[list[float]] = None

    def __post_init__(self) -> None:
        if not isinstance(self.lineage, frozenset):
            self.lineage = frozenset(self.lineage)

    @property
    def text_representation(self) -> Optional[str]:
        return self.content if isinstance(self.content, str) else None

    def evolve(self, **changes: Any) -> "Document":
        """Copy with replaced fields; mutable containers are shallow-copied."""
        if "properties" not in changes:
            changes["properties"] = dict(self.properties)
        if "children" not in changes:
            changes["children"] = list(self.children)
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"doc_id": self.doc_id}
        if isinstance(self.content, str):
            d["content"] = {"text": self.content}
        elif isinstance(self.content, bytes):
            d["content"] = {"binary_b64": base64.b64encode(self.content).decode("ascii")}
        d["children"] = [e.to_dict() for e in self.children]
        d["properties"] = self.properties
        d["lineage"] = sorted(self.lineage)
        if self.embedding is not None:
            d["embedding"] = self.embedding
        return d

    @staticmethod
    def from_dict(d: dict) -> "Document":
        try:
            content: Union[str, bytes, None] = None
            raw = d.get("content")
            if isinstance(raw, dict):
                if "text" in raw:
                    content = raw["text"]
                elif "binary_b64" in raw:
                    content = base64.b64decode(raw["binary_b64"])
            return Document(
                doc_id=d["doc_id"],
                content=content,
                children=[Element.from_dict(e) for e in d.get("children", [])],
                properties=dict(d.get("properties", {})),
                lineage=frozenset(d.get("lineage", [])),
                embedding=d.get("embedding"),
            )
        except ParseError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"corrupt document payload: {exc}", location=str(d.get("doc_id", "?")))


def canonical_json(obj: Any) -> bytes:
    """Stable byte encoding: sorted keys, minimal separators, UTF-8."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def serialize_document(doc: Document) -> bytes:
    return canonical_json(doc.to_dict())


def deserialize_document(data: bytes) -> Document:
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid document JSON: {exc.msg}", offset=exc.pos)
    if not isinstance(payload, dict):
        raise ParseError("document payload must be a JSON object")
    return Document.from_dict(payload)


def serialize_stream(docs: Iterable[Document]) -> Iterable[bytes]:
    for doc in docs:
        yield serialize_document(doc)
