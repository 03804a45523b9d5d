"""Storage backend protocol.

The built-in index is one implementation; an adapter for an external search
engine plugs in by satisfying this surface (keyword + vector search and
property filtering over stored parents). The engine's source operators and
the service depend only on these methods.
"""

from __future__ import annotations

from typing import Optional, Protocol

from docflow.model.document import Document
from docflow.model.schema import DocSetSchema


class IndexBackend(Protocol):
    name: str

    def exists(self) -> bool: ...

    def write(self, docs) -> dict: ...

    def query(
        self,
        filters: Optional[list[dict]] = None,
        keyword: Optional[str] = None,
        limit: Optional[int] = None,
    ) -> list[Document]: ...

    def vector_query(
        self,
        query_text: str,
        k: int,
        filters: Optional[list[dict]] = None,
    ) -> list[tuple[Document, float]]: ...

    def search_chunks(self, query_text: str, k: int, filters: Optional[list[dict]] = None): ...

    @property
    def schema(self) -> DocSetSchema: ...

    def get_document(self, doc_id: str) -> Optional[Document]: ...
