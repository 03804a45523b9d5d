"""Chat providers: a replay provider for recorded fixtures and an HTTP client
for OpenAI-compatible chat-completion endpoints."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Optional, Union

import httpx

from docflow.errors import FixtureMissingError, ProviderError
from docflow.llm.base import LlmRequest


def prompt_sha256(system_prompt: str, user_prompt: str) -> str:
    return hashlib.sha256(f"{system_prompt}\x00{user_prompt}".encode("utf-8")).hexdigest()


class ScriptedProvider:
    """Replays recorded responses keyed by the sha256 of the prompt pair."""

    provider_id = "scripted"

    def __init__(self, fixtures: Union[str, Path, list[dict], dict[str, str]]):
        if isinstance(fixtures, (str, Path)):
            fixtures = json.loads(Path(fixtures).read_text(encoding="utf-8"))
        if isinstance(fixtures, list):
            self._responses = {f["prompt_sha256"]: f["response"] for f in fixtures}
        else:
            self._responses = dict(fixtures)

    def complete(self, request: LlmRequest) -> str:
        key = prompt_sha256(request.system_prompt, request.user_prompt)
        if key not in self._responses:
            head = request.user_prompt.strip().splitlines()
            head_text = head[-1][:160] if head else ""
            raise FixtureMissingError(f"no scripted response for prompt {key[:16]}… (prompt tail: {head_text!r})")
        return self._responses[key]


def record_fixture(system_prompt: str, user_prompt: str, response: str) -> dict:
    return {"prompt_sha256": prompt_sha256(system_prompt, user_prompt), "response": response}


class HttpChatProvider:
    """OpenAI-compatible chat-completions client.

    The API key is read from the named environment variable at call time so
    configs never embed secrets.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key_env: Optional[str] = None,
        timeout: float = 60.0,
        client: Optional[httpx.Client] = None,
    ) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.provider_id = f"http:{model}"
        self._client = client or httpx.Client(timeout=timeout)

    def complete(self, request: LlmRequest) -> str:
        headers = {}
        if self.api_key_env:
            key = os.environ.get(self.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        body: dict = {
            "model": self.model,
            "temperature": request.temperature,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
        }
        if request.response_format == "json-with-schema":
            body["response_format"] = {"type": "json_object"}
        try:
            resp = self._client.post(f"{self.endpoint}/chat/completions", json=body, headers=headers)
        except httpx.HTTPError as exc:
            raise ProviderError(f"transport failure: {exc}", retryable=True)
        if resp.status_code != 200:
            retryable = resp.status_code == 429 or resp.status_code >= 500
            raise ProviderError(f"provider returned HTTP {resp.status_code}: {resp.text[:200]}", retryable=retryable)
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise ProviderError(f"malformed provider response: {exc}", retryable=False)
