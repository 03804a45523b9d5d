import json

import pytest
from hypothesis import given, settings, strategies as st

from docflow.errors import DocflowError, ParseError, SchemaError
from docflow.model import (
    BBox,
    Document,
    Element,
    ELEMENT_KINDS,
    deserialize_document,
    infer_schema,
    parse_docparse_json,
    serialize_document,
)

MINIMAL_TABLE = {
    "elements": [
        {
            "type": "table",
            "text_representation": "a | b\nc | d",
            "bbox": [0.1, 0.1, 0.9, 0.5],
            "page_number": 0,
            "table": {
                "rows": 2,
                "cols": 2,
                "cells": [
                    {"row": 0, "col": 0, "text": "a"},
                    {"row": 0, "col": 1, "text": "b"},
                    {"row": 1, "col": 0, "text": "c"},
                    {"row": 1, "col": 1, "text": "d"},
                ],
            },
        }
    ]
}


def test_minimal_table_parses():
    doc = parse_docparse_json(json.dumps(MINIMAL_TABLE).encode())
    assert len(doc.children) == 1
    table = doc.children[0]
    assert table.kind == "table"
    assert table.type_specific["rows"] == 2
    assert table.type_specific["cols"] == 2


def test_unknown_element_label_rejected():
    payload = {"elements": [{"type": "narrative", "text_representation": "x"}]}
    with pytest.raises(SchemaError, match="narrative"):
        parse_docparse_json(json.dumps(payload).encode())


def test_reading_order_preserved():
    payload = {
        "elements": [
            {"type": "section-header", "text_representation": "Analysis"},
            {"type": "text", "text_representation": "The airplane departed."},
            MINIMAL_TABLE["elements"][0],
        ]
    }
    doc = parse_docparse_json(json.dumps(payload).encode())
    assert [e.kind for e in doc.children] == ["section-header", "text", "table"]
    assert doc.text_representation.startswith("Analysis\nThe airplane departed.")


def test_malformed_json_reports_byte_offset():
    with pytest.raises(ParseError) as err:
        parse_docparse_json(b'{"elements": [}')
    assert err.value.offset is not None
    assert "byte" in str(err.value)


def test_eleven_kinds_exactly():
    assert len(ELEMENT_KINDS) == 11
    assert {"table", "picture", "text", "title"} <= ELEMENT_KINDS


def test_bbox_range_enforced():
    with pytest.raises(SchemaError):
        BBox(0, 0.5, 0.2, 0.4, 0.8)  # x1 > x2
    with pytest.raises(SchemaError):
        BBox(0, -0.1, 0.0, 0.5, 0.5)


def test_table_tiling_enforced():
    bad = dict(MINIMAL_TABLE["elements"][0])
    bad_cells = [
        {"row": 0, "col": 0, "row_span": 2, "col_span": 1, "text": "tall"},
        {"row": 0, "col": 1, "text": "b"},
        {"row": 1, "col": 0, "text": "overlaps"},
        {"row": 1, "col": 1, "text": "d"},
    ]
    bad["table"] = {"rows": 2, "cols": 2, "cells": bad_cells}
    with pytest.raises(SchemaError, match="tile"):
        parse_docparse_json(json.dumps({"elements": [bad]}).encode())


@st.composite
def tilings(draw):
    """Random valid tilings: each row independently split into column spans."""
    rows = draw(st.integers(1, 5))
    cols = draw(st.integers(1, 6))
    cells = []
    for r in range(rows):
        c = 0
        while c < cols:
            span = draw(st.integers(1, cols - c))
            cells.append({"row": r, "col": c, "row_span": 1, "col_span": span, "text": "x"})
            c += span
    return rows, cols, cells


@settings(max_examples=40, deadline=None)
@given(tilings())
def test_valid_tilings_accepted_and_corruptions_rejected(tiling):
    rows, cols, cells = tiling
    Element("e0", "table", type_specific={"rows": rows, "cols": cols, "cells": cells})
    widened = [dict(c) for c in cells]
    widened[0]["col_span"] += 1  # now overlaps or overflows
    with pytest.raises(SchemaError):
        Element("e1", "table", type_specific={"rows": rows, "cols": cols, "cells": widened})


def test_picture_gets_format_and_resolution():
    payload = {"elements": [{"type": "picture", "properties": {"format": "png", "resolution": [640, 480]}}]}
    doc = parse_docparse_json(json.dumps(payload).encode())
    assert doc.children[0].type_specific == {"format": "png", "resolution": [640, 480]}


# -- serialization -----------------------------------------------------------

def test_empty_document_round_trips():
    doc = Document(doc_id="d1", lineage=frozenset({"d1"}))
    assert deserialize_document(serialize_document(doc)) == doc


def test_nested_property_round_trips():
    doc = Document(doc_id="d1", content="text", properties={"a": {"b": [1, 2]}}, lineage=frozenset({"d1"}))
    assert deserialize_document(serialize_document(doc)) == doc


def test_binary_content_round_trips():
    doc = Document(doc_id="d1", content=b"\x00\xffbinary", lineage=frozenset({"d1"}))
    assert deserialize_document(serialize_document(doc)) == doc


def test_corpus_reserializes_byte_identical(bench_corpus):
    # parse → serialize → deserialize → serialize must be byte-stable
    for path in sorted((bench_corpus / "docs").glob("*.json"))[:100]:
        doc = parse_docparse_json(path.read_bytes(), doc_id=path.stem)
        first = serialize_document(doc)
        second = serialize_document(deserialize_document(first))
        assert first == second


_scalars = st.one_of(st.integers(-10, 10), st.booleans(), st.text(max_size=8), st.floats(-5, 5, allow_nan=False))


@settings(max_examples=50, deadline=None)
@given(
    props=st.dictionaries(st.text(st.characters(whitelist_categories=("Ll",)), min_size=1, max_size=6), _scalars, max_size=5),
    text=st.one_of(st.none(), st.text(max_size=40)),
)
def test_document_round_trip_property(props, text):
    doc = Document(doc_id="d", content=text, properties=props, lineage=frozenset({"root"}))
    assert deserialize_document(serialize_document(doc)) == doc


def test_corrupt_payload_reports_location():
    with pytest.raises(ParseError):
        deserialize_document(b"{not json")
    with pytest.raises(ParseError):
        deserialize_document(b'{"doc_id": "x", "children": [{"kind": "text"}]}')  # missing element_id


# -- schema inference ----------------------------------------------------------

def _doc(**props):
    return Document(doc_id=props.get("accidentNumber", "d"), content="text", properties=props, lineage=frozenset({"d"}))


def test_schema_lists_report_fields_with_samples():
    docs = [
        _doc(accidentNumber="CEN23FA095", aircraft="Piper PA-38-112", windSpeed="19 knots gusting to 22 knots"),
        _doc(accidentNumber="WPR23LA001", aircraft="Cessna 172S", windSpeed="5 knots"),
    ]
    schema = infer_schema(docs)
    names = schema.field_names()
    assert names[:3] == ["accidentNumber", "aircraft", "windSpeed"]
    assert "CEN23FA095" in schema.get("accidentNumber").sample_values
    assert "Piper PA-38-112" in schema.get("aircraft").sample_values
    assert schema.has_text_representation


def test_schema_of_propertyless_doc_is_text_only():
    schema = infer_schema([Document(doc_id="d", content="x", lineage=frozenset({"d"}))])
    assert schema.field_names() == ["text_representation"]


def test_majority_dtype_with_conflict_note():
    docs = [_doc(n=1), _doc(n=2), _doc(n=3), _doc(n="four")]
    schema = infer_schema(docs)
    field = schema.get("n")
    assert field.dtype == "int"
    assert "string (1)" in field.description and "int (3)" in field.description
    assert field.sample_values == [1, 2, 3]


def test_schema_inference_deterministic():
    docs = [_doc(a=1, b="x"), _doc(b="y", c=2.5)]
    assert infer_schema(docs).to_dict() == infer_schema(docs).to_dict()


def test_empty_sample_rejected():
    with pytest.raises(DocflowError):
        infer_schema([])


def test_datetime_detection():
    schema = infer_schema([_doc(date="2024-07-14"), _doc(date="2023-11-02")])
    assert schema.get("date").dtype == "datetime"
