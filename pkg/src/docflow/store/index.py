"""Built-in hybrid index: property filters, BM25 keyword search, exact kNN.

Indexing is chunk-level (one chunk per leaf element, split at 512 tokens with
64-token overlap); query results are whole parent documents reassembled from
the docstore. A parent matched through several chunks appears once with its
best-chunk score.

On-disk layout per index::

    <root>/<name>/manifest.json          # schema, embedder id, stats, current version
    <root>/<name>/<version>/chunks.json
    <root>/<name>/<version>/postings.json
    <root>/<name>/<version>/vectors.bin  # float32 little-endian rows
    <root>/<name>/<version>/docstore.jsonl

Commits write a fresh version directory and atomically swap the manifest, so
readers always see a consistent snapshot. Writers within one process take an
index-level lock; cross-process writers are last-commit-wins.
"""

from __future__ import annotations

import json
import math
import os
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np

from docflow.errors import DocflowError, SchemaError, UnknownFieldError
from docflow.llm.embedding import Embedder, tokenize
from docflow.model.document import Document, Element, serialize_document, deserialize_document
from docflow.model.schema import DocSetSchema, TEXT_FIELD, infer_schema

BM25_K1 = 1.2
BM25_B = 0.75
CHUNK_MAX_TOKENS = 512
CHUNK_OVERLAP_TOKENS = 64
# Micro-chunks (section headers, page furniture) carry no retrievable semantics
# for similarity search; they stay keyword-searchable but are not vector-indexed.
MIN_VECTOR_TOKENS = 5

_TOKEN_OFFSETS = re.compile(r"[^\W_]+", re.UNICODE)


def split_element_text(text: str) -> list[tuple[int, int, str]]:
    """Split into (core_start, core_end, overlapped_text) windows.

    Core ranges tile the text exactly; overlapped text extends each window by
    the configured token overlap for retrieval quality. Concatenating core
    slices reproduces the input byte-for-byte.
    """
    spans = [(m.start(), m.end()) for m in _TOKEN_OFFSETS.finditer(text)]
    n = len(spans)
    if n <= CHUNK_MAX_TOKENS:
        return [(0, len(text), text)]
    step = CHUNK_MAX_TOKENS - CHUNK_OVERLAP_TOKENS
    starts = list(range(0, n, step))
    # drop a trailing window that would only repeat overlap
    if len(starts) > 1 and starts[-1] + CHUNK_OVERLAP_TOKENS >= n:
        starts.pop()
    out: list[tuple[int, int, str]] = []
    for i, a in enumerate(starts):
        core_start = 0 if i == 0 else spans[a][0]
        core_end = len(text) if i == len(starts) - 1 else spans[starts[i + 1]][0]
        window_end = len(text) if i == len(starts) - 1 else spans[min(a + CHUNK_MAX_TOKENS, n) - 1][1]
        out.append((core_start, core_end, text[core_start:window_end]))
    return out


@dataclass
class ChunkRecord:
    chunk_id: str
    parent_doc_id: str
    ordinal: int
    element_index: int
    core_start: int
    core_end: int
    text: str
    properties: dict
    token_count: int
    has_embedding: bool

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "parent_doc_id": self.parent_doc_id,
            "ordinal": self.ordinal,
            "element_index": self.element_index,
            "core_start": self.core_start,
            "core_end": self.core_end,
            "text": self.text,
            "properties": self.properties,
            "token_count": self.token_count,
            "has_embedding": self.has_embedding,
        }

    @staticmethod
    def from_dict(d: dict) -> "ChunkRecord":
        return ChunkRecord(**d)


def _match_predicate(properties: dict, pred: dict) -> bool:
    value = properties.get(pred["field"])
    op = pred.get("op", "eq")
    if op == "eq":
        return value == pred.get("value")
    if op == "in":
        return value in pred.get("values", [])
    if op == "prefix":
        return isinstance(value, str) and value.startswith(str(pred.get("value", "")))
    if op == "range":
        if value is None:
            return False
        lo, hi = pred.get("min"), pred.get("max")
        try:
            if lo is not None and (value < lo if not pred.get("min_exclusive") else value <= lo):
                return False
            if hi is not None and (value > hi if not pred.get("max_exclusive") else value >= hi):
                return False
        except TypeError:
            return False
        return True
    raise SchemaError(f"unknown predicate op: {op!r}")


def validate_predicates(filters: Iterable[dict], schema: DocSetSchema, context: str) -> None:
    names = set(schema.field_names())
    for pred in filters:
        if not isinstance(pred, dict) or "field" not in pred:
            raise SchemaError(f"malformed predicate: {pred!r}")
        if pred["field"] not in names:
            raise UnknownFieldError(pred["field"], context)


@dataclass
class _Snapshot:
    version: str
    parents: dict[str, Document]
    chunks: list[ChunkRecord]
    postings: dict[str, list[tuple[int, int]]]
    vectors: np.ndarray
    schema: DocSetSchema
    stats: dict

    def reassembled_text(self, doc_id: str) -> str:
        """Rebuild parent text purely from chunk core slices (fidelity check)."""
        per_element: dict[int, list[ChunkRecord]] = {}
        for c in self.chunks:
            if c.parent_doc_id == doc_id:
                per_element.setdefault(c.element_index, []).append(c)
        parts = []
        for idx in sorted(per_element):
            ordered = sorted(per_element[idx], key=lambda c: c.ordinal)
            parts.append("".join(c.text[: c.core_end - c.core_start] for c in ordered))
        return "\n".join(parts)


class StoredIndex:
    def __init__(self, root: Path, name: str, embedder: Embedder) -> None:
        self.name = name
        self.path = root / name
        self.embedder = embedder
        self._lock = threading.Lock()
        self._cached: Optional[_Snapshot] = None
        self._cached_version: Optional[str] = None

    # -- manifest / snapshot ------------------------------------------------

    def exists(self) -> bool:
        return (self.path / "manifest.json").exists()

    def _manifest(self) -> dict:
        return json.loads((self.path / "manifest.json").read_text(encoding="utf-8"))

    def _load(self) -> _Snapshot:
        if not self.exists():
            raise DocflowError(f"index {self.name!r} does not exist")
        manifest = self._manifest()
        version = manifest["version"]
        if self._cached is not None and self._cached_version == version:
            return self._cached
        vdir = self.path / version
        chunks = [ChunkRecord.from_dict(d) for d in json.loads((vdir / "chunks.json").read_text(encoding="utf-8"))]
        postings_raw = json.loads((vdir / "postings.json").read_text(encoding="utf-8"))
        postings = {tok: [(int(r), int(tf)) for r, tf in rows] for tok, rows in postings_raw.items()}
        dim = manifest["dimension"]
        raw = np.fromfile(vdir / "vectors.bin", dtype="<f4")
        vectors = raw.reshape(-1, dim) if len(chunks) else np.zeros((0, dim), dtype="<f4")
        parents: dict[str, Document] = {}
        with open(vdir / "docstore.jsonl", "rb") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    doc = deserialize_document(line)
                    parents[doc.doc_id] = doc
        snapshot = _Snapshot(
            version=version,
            parents=parents,
            chunks=chunks,
            postings=postings,
            vectors=vectors,
            schema=DocSetSchema.from_dict(manifest["schema"]),
            stats=manifest["stats"],
        )
        self._cached, self._cached_version = snapshot, version
        return snapshot

    @property
    def schema(self) -> DocSetSchema:
        return self._load().schema

    def stats(self) -> dict:
        return self._load().stats

    def get_document(self, doc_id: str) -> Optional[Document]:
        return self._load().parents.get(doc_id)

    # -- write ----------------------------------------------------------------

    def write(self, docs: Iterable[Document]) -> dict:
        """Idempotent per doc_id: rewriting a parent replaces its chunks."""
        with self._lock:
            incoming_parents: dict[str, Document] = {}
            incoming_chunks: dict[str, list[Document]] = {}
            order: list[str] = []
            seen: set[str] = set()
            for doc in docs:
                parent_id = doc.properties.get("parent_id")
                key = parent_id if parent_id else doc.doc_id
                if parent_id:
                    incoming_chunks.setdefault(parent_id, []).append(doc)
                else:
                    incoming_parents[doc.doc_id] = doc
                if key not in seen:
                    seen.add(key)
                    order.append(key)

            if not order:
                return {"index": self.name, "parents_written": 0, "chunks_written": 0, "replaced": 0}

            existing = self._load() if self.exists() else None
            parents: dict[str, Document] = dict(existing.parents) if existing else {}
            chunks_by_parent: dict[str, list[ChunkRecord]] = {}
            if existing:
                for c in existing.chunks:
                    chunks_by_parent.setdefault(c.parent_doc_id, []).append(c)
            old_vectors: dict[str, np.ndarray] = {}
            if existing:
                for row, c in enumerate(existing.chunks):
                    old_vectors[c.chunk_id] = existing.vectors[row]

            replaced = 0
            new_vectors: dict[str, np.ndarray] = {}
            for pid in order:
                parent = incoming_parents.get(pid)
                chunk_docs = incoming_chunks.get(pid, [])
                if parent is None:
                    # chunks without their parent in the stream: orphan write
                    raise DocflowError(f"chunks for unknown parent {pid!r} in write stream")
                if pid in parents:
                    replaced += 1
                    chunks_by_parent.pop(pid, None)
                if not chunk_docs and parent.children:
                    chunk_docs = _chunks_from_children(parent)
                rebuilt, records, vecs = self._build_records(parent, chunk_docs)
                parents[pid] = rebuilt
                chunks_by_parent[pid] = records
                new_vectors.update(vecs)

            all_chunks: list[ChunkRecord] = []
            for pid in sorted(chunks_by_parent):
                for c in sorted(chunks_by_parent[pid], key=lambda c: c.ordinal):
                    all_chunks.append(c)

            self._commit(parents, all_chunks, {**old_vectors, **new_vectors})
            return {
                "index": self.name,
                "parents_written": len(order),
                "chunks_written": sum(len(chunks_by_parent[p]) for p in order if p in chunks_by_parent),
                "replaced": replaced,
            }

    def _build_records(
        self, parent: Document, chunk_docs: list[Document]
    ) -> tuple[Document, list[ChunkRecord], dict[str, np.ndarray]]:
        dim = self.embedder.dimension
        records: list[ChunkRecord] = []
        vectors: dict[str, np.ndarray] = {}
        elements: list[Element] = []
        ordinal = 0
        for eidx, chunk in enumerate(chunk_docs):
            if chunk.children:
                elements.extend(chunk.children)
            text = chunk.text_representation
            if text is None or text == "":
                continue
            pieces = split_element_text(text)
            for core_start, core_end, piece_text in pieces:
                cid = f"{parent.doc_id}#c{ordinal:04d}"
                piece_tokens = len(tokenize(piece_text))
                has_embedding = chunk.embedding is not None and piece_tokens >= MIN_VECTOR_TOKENS
                if has_embedding:
                    if len(pieces) == 1:
                        vec = np.asarray(chunk.embedding, dtype="<f4")
                    else:
                        vec = np.asarray(self.embedder.embed(piece_text).values, dtype="<f4")
                    if vec.shape[0] != dim:
                        raise DocflowError(
                            f"embedding dimension {vec.shape[0]} does not match index dimension {dim}"
                        )
                    vectors[cid] = vec
                records.append(
                    ChunkRecord(
                        chunk_id=cid,
                        parent_doc_id=parent.doc_id,
                        ordinal=ordinal,
                        element_index=eidx,
                        core_start=core_start,
                        core_end=core_end,
                        text=piece_text,
                        properties=dict(chunk.properties),
                        token_count=piece_tokens,
                        has_embedding=has_embedding,
                    )
                )
                ordinal += 1
        rebuilt = parent.evolve(children=elements if elements else list(parent.children))
        return rebuilt, records, vectors

    def _commit(self, parents: dict[str, Document], chunks: list[ChunkRecord], vectors: dict[str, np.ndarray]) -> None:
        dim = self.embedder.dimension
        version = "v00000001"
        if self.exists():
            current = self._manifest()["version"]
            version = f"v{int(current[1:]) + 1:08d}"
        vdir = self.path / version
        vdir.mkdir(parents=True, exist_ok=True)

        postings: dict[str, list[tuple[int, int]]] = {}
        matrix = np.zeros((len(chunks), dim), dtype="<f4")
        for row, c in enumerate(chunks):
            if c.has_embedding and c.chunk_id in vectors:
                matrix[row] = vectors[c.chunk_id]
            counts: dict[str, int] = {}
            for tok in tokenize(c.text):
                counts[tok] = counts.get(tok, 0) + 1
            for tok, tf in counts.items():
                postings.setdefault(tok, []).append((row, tf))

        ordered_parents = [parents[k] for k in sorted(parents)]
        schema = infer_schema(ordered_parents, max_samples=len(ordered_parents)) if ordered_parents else DocSetSchema()
        token_total = sum(c.token_count for c in chunks)
        stats = {
            "parent_count": len(parents),
            "chunk_count": len(chunks),
            "avg_chunk_tokens": (token_total / len(chunks)) if chunks else 0.0,
        }

        (vdir / "chunks.json").write_text(json.dumps([c.to_dict() for c in chunks]), encoding="utf-8")
        (vdir / "postings.json").write_text(json.dumps(postings), encoding="utf-8")
        matrix.tofile(vdir / "vectors.bin")
        with open(vdir / "docstore.jsonl", "wb") as fh:
            for doc in ordered_parents:
                fh.write(serialize_document(doc) + b"\n")

        manifest = {
            "name": self.name,
            "version": version,
            "embedder_model_id": self.embedder.model_id,
            "dimension": dim,
            "schema": schema.to_dict(),
            "stats": stats,
        }
        tmp = self.path / "manifest.json.tmp"
        tmp.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
        os.replace(tmp, self.path / "manifest.json")
        self._cached = None

    # -- read -----------------------------------------------------------------

    def query(
        self,
        filters: Optional[list[dict]] = None,
        keyword: Optional[str] = None,
        limit: Optional[int] = None,
    ) -> list[Document]:
        """Property/keyword scan returning reassembled parents.

        Ordering: (BM25 best-chunk score desc, doc_id) with a keyword;
        doc_id alone otherwise.
        """
        snap = self._load()
        filters = filters or []
        validate_predicates(filters, snap.schema, f"index {self.name!r}")
        candidates = {
            doc_id
            for doc_id, doc in snap.parents.items()
            if all(_match_predicate(doc.properties, p) for p in filters)
        }
        if keyword:
            scores = self._bm25_scores(snap, keyword)
            best: dict[str, float] = {}
            for row, score in scores.items():
                pid = snap.chunks[row].parent_doc_id
                if pid in candidates and score > 0:
                    best[pid] = max(best.get(pid, 0.0), score)
            ordered = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
            result = [snap.parents[pid] for pid, _ in ordered]
        else:
            result = [snap.parents[pid] for pid in sorted(candidates)]
        return result[:limit] if limit is not None else result

    def _bm25_scores(self, snap: _Snapshot, keyword: str) -> dict[int, float]:
        n = len(snap.chunks)
        if n == 0:
            return {}
        avg_len = max(1e-9, sum(c.token_count for c in snap.chunks) / n)
        scores: dict[int, float] = {}
        for tok in tokenize(keyword):
            rows = snap.postings.get(tok)
            if not rows:
                continue
            df = len(rows)
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            for row, tf in rows:
                length = snap.chunks[row].token_count
                denom = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * length / avg_len)
                scores[row] = scores.get(row, 0.0) + idf * (tf * (BM25_K1 + 1.0)) / denom
        return scores

    def search_chunks(
        self,
        query_text: str,
        k: int,
        filters: Optional[list[dict]] = None,
    ) -> list[tuple[ChunkRecord, float]]:
        """Exact top-k chunks by cosine similarity (chunk-level view for RAG)."""
        snap = self._load()
        if k < 1:
            raise DocflowError("k must be >= 1")
        filters = filters or []
        validate_predicates(filters, snap.schema, f"index {self.name!r}")
        query_vec = self.embedder.embed(query_text)
        index_model = self._manifest()["embedder_model_id"]
        if query_vec.model_id != index_model:
            raise DocflowError(
                f"embedder mismatch: index built with {index_model}, query uses {query_vec.model_id}"
            )
        rows = [
            i
            for i, c in enumerate(snap.chunks)
            if c.has_embedding and all(_match_predicate(c.properties, p) for p in filters)
        ]
        if not rows:
            return []
        # score in float64 so ranking is exactly reproducible by a naive scan
        sims = snap.vectors[rows].astype(np.float64) @ np.asarray(query_vec.values, dtype=np.float64)
        ranked = sorted(zip(rows, sims.tolist()), key=lambda t: (-t[1], snap.chunks[t[0]].chunk_id))
        return [(snap.chunks[row], float(sim)) for row, sim in ranked[:k]]

    def vector_query(
        self,
        query_text: str,
        k: int,
        filters: Optional[list[dict]] = None,
    ) -> list[tuple[Document, float]]:
        """Top-k chunk search reassembled to parents (best-chunk score, once each)."""
        snap = self._load()
        hits = self.search_chunks(query_text, k, filters)
        best: dict[str, float] = {}
        for chunk, score in hits:
            if chunk.parent_doc_id not in best:
                best[chunk.parent_doc_id] = score
        ordered = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
        return [(snap.parents[pid], score) for pid, score in ordered]

    def reassembled_text(self, doc_id: str) -> str:
        return self._load().reassembled_text(doc_id)

    def all_parents(self) -> list[Document]:
        snap = self._load()
        return [snap.parents[k] for k in sorted(snap.parents)]


def _chunks_from_children(parent: Document) -> list[Document]:
    out = []
    for i, element in enumerate(parent.children):
        out.append(
            Document(
                doc_id=f"{parent.doc_id}#{element.element_id}",
                content=element.text_representation,
                children=[element],
                properties={**parent.properties, **element.properties, "parent_id": parent.doc_id},
                lineage=parent.lineage,
            )
        )
    return out


class IndexManager:
    """Opens and lists indexes under a root directory; caches handles."""

    def __init__(self, root: str | Path, embedder: Embedder) -> None:
        self.root = Path(root)
        self.embedder = embedder
        self._handles: dict[str, StoredIndex] = {}
        self._lock = threading.Lock()

    def open(self, name: str) -> StoredIndex:
        with self._lock:
            if name not in self._handles:
                self._handles[name] = StoredIndex(self.root, name, self.embedder)
            return self._handles[name]

    def exists(self, name: str) -> bool:
        return self.open(name).exists()

    def list_indexes(self) -> list[str]:
        if not self.root.exists():
            return []
        return sorted(p.name for p in self.root.iterdir() if (p / "manifest.json").exists())

    def find_document(self, doc_id: str) -> Optional[tuple[str, Document]]:
        for name in self.list_indexes():
            doc = self.open(name).get_document(doc_id)
            if doc is not None:
                return name, doc
        return None
