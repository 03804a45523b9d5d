from docflow.store.backend import IndexBackend
from docflow.store.index import (
    BM25_K1,
    BM25_B,
    CHUNK_MAX_TOKENS,
    CHUNK_OVERLAP_TOKENS,
    ChunkRecord,
    IndexManager,
    StoredIndex,
    split_element_text,
    validate_predicates,
)

__all__ = [
    "BM25_K1",
    "BM25_B",
    "CHUNK_MAX_TOKENS",
    "CHUNK_OVERLAP_TOKENS",
    "ChunkRecord",
    "IndexBackend",
    "IndexManager",
    "StoredIndex",
    "split_element_text",
    "validate_predicates",
]
