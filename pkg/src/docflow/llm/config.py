"""Provider configuration.

A config file maps purposes to providers, e.g.::

    {
      "retry_bound": 3,
      "providers": {
        "plan": {"kind": "scripted", "fixture_file": "planner_fixtures.json"},
        "default": {"kind": "oracle"}
      },
      "embedder": {"kind": "hashing", "dimension": 384}
    }

HTTP providers name the endpoint, model, and the *environment variable*
holding the API key: {"kind": "http", "endpoint": ..., "model": ...,
"api_key_env": "OPENAI_API_KEY", "temperature": 0.0}.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field

from docflow.errors import DocflowError
from docflow.llm.base import ChatProvider
from docflow.llm.embedding import Embedder, HashingEmbedder
from docflow.llm.oracle import OracleProvider
from docflow.llm.providers import HttpChatProvider, ScriptedProvider


class ProviderSpec(BaseModel):
    kind: str
    fixture_file: Optional[str] = None
    endpoint: Optional[str] = None
    model: Optional[str] = None
    api_key_env: Optional[str] = None
    temperature: float = 0.0
    timeout: float = 60.0


class EmbedderSpec(BaseModel):
    kind: str = "hashing"
    dimension: int = 384


class LlmConfig(BaseModel):
    retry_bound: int = 3
    providers: dict[str, ProviderSpec] = Field(default_factory=dict)
    embedder: EmbedderSpec = Field(default_factory=EmbedderSpec)

    @staticmethod
    def from_file(path: str | Path) -> "LlmConfig":
        return LlmConfig.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))


def build_provider(spec: ProviderSpec, base_dir: Optional[Path] = None) -> ChatProvider:
    if spec.kind == "oracle":
        return OracleProvider()
    if spec.kind == "scripted":
        if not spec.fixture_file:
            raise DocflowError("scripted provider requires fixture_file")
        path = Path(spec.fixture_file)
        if base_dir and not path.is_absolute():
            path = base_dir / path
        return ScriptedProvider(path)
    if spec.kind == "http":
        if not spec.endpoint or not spec.model:
            raise DocflowError("http provider requires endpoint and model")
        return HttpChatProvider(spec.endpoint, spec.model, spec.api_key_env, timeout=spec.timeout)
    raise DocflowError(f"unknown provider kind: {spec.kind!r}")


def build_embedder(spec: EmbedderSpec) -> Embedder:
    if spec.kind == "hashing":
        return HashingEmbedder(spec.dimension)
    raise DocflowError(f"unknown embedder kind: {spec.kind!r}")


class ProviderRouter:
    """Purpose → provider resolution with a 'default' fallback."""

    def __init__(self, config: LlmConfig, base_dir: Optional[Path] = None) -> None:
        self.config = config
        self._providers = {name: build_provider(spec, base_dir) for name, spec in config.providers.items()}
        if "default" not in self._providers:
            self._providers["default"] = OracleProvider()
        self.embedder = build_embedder(config.embedder)

    def __call__(self, purpose: str) -> ChatProvider:
        return self._providers.get(purpose, self._providers["default"])
