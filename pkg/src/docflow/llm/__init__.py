from docflow.llm.base import LlmClient, LlmRequest, LlmTranscriptEntry, Transcript
from docflow.llm.config import LlmConfig, ProviderRouter
from docflow.llm.embedding import EmbeddingVector, HashingEmbedder, cosine, tokenize
from docflow.llm.oracle import OracleProvider
from docflow.llm.providers import HttpChatProvider, ScriptedProvider, prompt_sha256, record_fixture

__all__ = [
    "LlmClient",
    "LlmConfig",
    "LlmRequest",
    "LlmTranscriptEntry",
    "Transcript",
    "ProviderRouter",
    "EmbeddingVector",
    "HashingEmbedder",
    "HttpChatProvider",
    "OracleProvider",
    "ScriptedProvider",
    "cosine",
    "prompt_sha256",
    "record_fixture",
    "tokenize",
]
