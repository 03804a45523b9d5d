"""Provider-agnostic chat-completion interface with a per-run transcript.

Every provider invocation — including JSON-mode retries — lands in the
transcript so execution traces can expose the full exchange.
"""

from __future__ import annotations

import json
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Protocol

import jsonschema

from docflow.errors import LlmValidationError, ProviderError

PURPOSES = ("plan", "extract", "filter", "reduce", "generate", "image-summary")


@dataclass(frozen=True)
class LlmRequest:
    purpose: str
    system_prompt: str
    user_prompt: str
    response_format: str = "free-text"  # or "json-with-schema"
    json_schema: Optional[dict] = None
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if self.purpose not in PURPOSES:
            raise ValueError(f"unknown request purpose: {self.purpose!r}")
        if self.response_format == "json-with-schema" and self.json_schema is None:
            raise ValueError("json-with-schema requests must carry a json_schema")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass
class LlmTranscriptEntry:
    call_index: int
    request: LlmRequest
    response: str
    provider_id: str
    latency_ms: int
    tag: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "call_index": self.call_index,
            "purpose": self.request.purpose,
            "system_prompt": self.request.system_prompt,
            "user_prompt": self.request.user_prompt,
            "response": self.response,
            "provider_id": self.provider_id,
            "latency_ms": self.latency_ms,
            "tag": self.tag,
        }


class Transcript:
    """Append-only call log; call_index assignment is atomic."""

    def __init__(self) -> None:
        self._entries: list[LlmTranscriptEntry] = []
        self._lock = threading.Lock()

    def append(self, request: LlmRequest, response: str, provider_id: str, latency_ms: int, tag: Optional[str]) -> int:
        with self._lock:
            idx = len(self._entries)
            self._entries.append(LlmTranscriptEntry(idx, request, response, provider_id, latency_ms, tag))
            return idx

    def entries(self) -> list[LlmTranscriptEntry]:
        with self._lock:
            return list(self._entries)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


class ChatProvider(Protocol):
    provider_id: str

    def complete(self, request: LlmRequest) -> str: ...


_FENCE = re.compile(r"^```(?:json)?\s*(.*?)\s*```$", re.DOTALL)


def extract_json_payload(text: str) -> Any:
    """Parse a JSON body, tolerating markdown code fences."""
    stripped = text.strip()
    m = _FENCE.match(stripped)
    if m:
        stripped = m.group(1)
    return json.loads(stripped)


class LlmClient:
    """Completion front-end: routes by purpose, validates JSON mode, records calls.

    ``resolver`` maps a request purpose to a provider; a plain provider may be
    passed instead when one backend serves everything.
    """

    def __init__(
        self,
        provider: ChatProvider | Callable[[str], ChatProvider],
        transcript: Optional[Transcript] = None,
        retry_bound: int = 3,
    ) -> None:
        self._resolve = provider if callable(provider) else (lambda _purpose: provider)
        self.transcript = transcript if transcript is not None else Transcript()
        self.retry_bound = max(1, retry_bound)

    def _call(self, request: LlmRequest, tag: Optional[str]) -> str:
        provider = self._resolve(request.purpose)
        started = time.monotonic()
        try:
            response = provider.complete(request)
        except ProviderError as exc:
            latency = int((time.monotonic() - started) * 1000)
            self.transcript.append(request, f"<transport-error: {exc}>", provider.provider_id, latency, tag)
            raise
        latency = int((time.monotonic() - started) * 1000)
        self.transcript.append(request, response, provider.provider_id, latency, tag)
        return response

    def complete(self, request: LlmRequest, tag: Optional[str] = None) -> str:
        """Run a completion. JSON-mode responses are schema-validated with
        re-prompts up to the retry bound; every attempt is transcribed."""
        errors: list[str] = []
        current = request
        last_response = ""
        for attempt in range(self.retry_bound):
            try:
                last_response = self._call(current, tag)
            except ProviderError:
                if attempt + 1 >= self.retry_bound:
                    raise
                continue
            if request.response_format != "json-with-schema":
                return last_response
            try:
                payload = extract_json_payload(last_response)
                jsonschema.validate(payload, request.json_schema)
                return last_response
            except (json.JSONDecodeError, jsonschema.ValidationError) as exc:
                msg = getattr(exc, "message", None) or str(exc)
                errors.append(f"attempt {attempt + 1}: {msg}")
                retry_note = "\n\nYour previous response(s) were invalid:\n" + "\n".join(f"- {e}" for e in errors)
                current = LlmRequest(
                    purpose=request.purpose,
                    system_prompt=request.system_prompt,
                    user_prompt=request.user_prompt + retry_note,
                    response_format=request.response_format,
                    json_schema=request.json_schema,
                    temperature=request.temperature,
                )
        raise LlmValidationError(
            f"response failed schema validation after {self.retry_bound} attempts",
            last_response=last_response,
            errors=errors,
        )

    def complete_json(self, request: LlmRequest, tag: Optional[str] = None) -> Any:
        return extract_json_payload(self.complete(request, tag))
