"""Prompt templates for the semantic operators.

These are versioned constants: transcripts recorded against one version replay
byte-for-byte. Bump PROMPT_VERSION when any template changes and regenerate
scripted fixtures.
"""

from __future__ import annotations

import json

PROMPT_VERSION = "v1"

EXTRACT_SYSTEM = (
    "You extract structured fields from documents. "
    "Respond with a single JSON object containing the requested fields. "
    "Omit a field when the document does not contain it."
)

EXTRACT_USER = "FIELDS:\n{fields}\n\nDOCUMENT:\n{document}"

FILTER_SYSTEM = "You decide whether a document satisfies a condition. Respond with exactly one word: true or false."

FILTER_USER = "QUESTION:\n{question}\n\nDOCUMENT:\n{document}"

REDUCE_SYSTEM = "You combine multiple documents into a single concise text."

REDUCE_USER = "INSTRUCTIONS:\n{instructions}\n\nDOCUMENTS:\n{documents}"

GENERATE_SYSTEM = "You answer a question using only the provided context."

GENERATE_USER = "QUESTION:\n{question}\n\nCONTEXT:\n{context}"

DOC_MARKER_OPEN = "<<<doc "
DOC_MARKER_CLOSE = ">>>"


def render_context_entry(doc_id: str, text: str) -> str:
    return f"{DOC_MARKER_OPEN}{doc_id}{DOC_MARKER_CLOSE}\n{text}"


def render_fields(fields: list[dict]) -> str:
    return json.dumps(fields, indent=2, ensure_ascii=False)
