"""Materialize checkpoints: persisted intermediate document streams.

Targets: ``memory`` (process-wide in-memory filesystem), ``disk`` (under the
engine data directory), or any fsspec URI. A checkpoint is a directory with a
manifest and numbered JSONL segments; a SHA-256 over the canonical serialized
stream verifies integrity on reload. Cloud URI schemes ride on fsspec and are
untested against real object stores here.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Iterator, Optional

import fsspec

from docflow.errors import DocflowError, IntegrityError
from docflow.model.document import Document, deserialize_document, serialize_document

SEGMENT_SIZE = 1000


@dataclass
class MaterializeCheckpoint:
    name: str
    target: str
    uri: str
    operator_id: str
    run_id: str
    content_hash: str
    count: int

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "target": self.target,
            "uri": self.uri,
            "operator_id": self.operator_id,
            "run_id": self.run_id,
            "content_hash": self.content_hash,
            "count": self.count,
        }


def resolve_target_uri(name: str, target: str, data_dir: str) -> str:
    if target == "memory":
        return f"memory://docflow-checkpoints/{name}"
    if target == "disk":
        return f"{data_dir}/checkpoints/{name}"
    if "://" in target:
        return target.rstrip("/") + f"/{name}"
    raise DocflowError(f"unsupported checkpoint target: {target!r}")


class CheckpointWriter:
    """Streams documents into segments while hashing; finalize() writes the manifest."""

    def __init__(self, name: str, target: str, data_dir: str, operator_id: str, run_id: str) -> None:
        self.name = name
        self.target = target
        self.uri = resolve_target_uri(name, target, data_dir)
        self.operator_id = operator_id
        self.run_id = run_id
        self._fs, self._root = fsspec.core.url_to_fs(self.uri)
        self._fs.makedirs(self._root, exist_ok=True)
        self._hash = hashlib.sha256()
        self._count = 0
        self._segments: list[str] = []
        self._buffer: list[bytes] = []

    def add(self, doc: Document) -> None:
        payload = serialize_document(doc)
        self._hash.update(payload + b"\n")
        self._buffer.append(payload)
        self._count += 1
        if len(self._buffer) >= SEGMENT_SIZE:
            self._flush()

    def _flush(self) -> None:
        if not self._buffer:
            return
        segment = f"docs-{len(self._segments):08d}.jsonl"
        with self._fs.open(f"{self._root}/{segment}", "wb") as fh:
            fh.write(b"\n".join(self._buffer) + b"\n")
        self._segments.append(segment)
        self._buffer = []

    def finalize(self) -> MaterializeCheckpoint:
        self._flush()
        checkpoint = MaterializeCheckpoint(
            name=self.name,
            target=self.target,
            uri=self.uri,
            operator_id=self.operator_id,
            run_id=self.run_id,
            content_hash=self._hash.hexdigest(),
            count=self._count,
        )
        manifest = dict(checkpoint.to_dict())
        manifest["segments"] = self._segments
        with self._fs.open(f"{self._root}/manifest.json", "w") as fh:
            fh.write(json.dumps(manifest, indent=2))
        return checkpoint


def load_checkpoint(uri: str) -> MaterializeCheckpoint:
    fs, root = fsspec.core.url_to_fs(uri)
    try:
        with fs.open(f"{root}/manifest.json", "r") as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise DocflowError(f"no checkpoint manifest at {uri}")
    return MaterializeCheckpoint(
        name=manifest["name"],
        target=manifest["target"],
        uri=uri,
        operator_id=manifest.get("operator_id", ""),
        run_id=manifest.get("run_id", ""),
        content_hash=manifest["content_hash"],
        count=manifest["count"],
    )


def read_checkpoint(uri: str) -> Iterator[Document]:
    """Verify the content hash, then yield documents in stored order."""
    fs, root = fsspec.core.url_to_fs(uri)
    with fs.open(f"{root}/manifest.json", "r") as fh:
        manifest = json.load(fh)
    hasher = hashlib.sha256()
    lines: list[bytes] = []
    for segment in manifest["segments"]:
        with fs.open(f"{root}/{segment}", "rb") as fh:
            for line in fh.read().splitlines():
                if line:
                    hasher.update(line + b"\n")
                    lines.append(line)
    if hasher.hexdigest() != manifest["content_hash"]:
        raise IntegrityError(
            f"checkpoint {manifest['name']!r} content hash mismatch "
            f"(expected {manifest['content_hash'][:12]}…, got {hasher.hexdigest()[:12]}…)"
        )
    if len(lines) != manifest["count"]:
        raise IntegrityError(f"checkpoint {manifest['name']!r} has {len(lines)} docs, manifest says {manifest['count']}")
    for line in lines:
        yield deserialize_document(line)


def write_documents(
    docs: list[Document] | Iterator[Document],
    name: str,
    target: str,
    data_dir: str = ".",
    operator_id: str = "",
    run_id: str = "",
) -> MaterializeCheckpoint:
    writer = CheckpointWriter(name, target, data_dir, operator_id, run_id)
    for doc in docs:
        writer.add(doc)
    return writer.finalize()
