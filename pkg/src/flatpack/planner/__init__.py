"""Prompt construction, provider completion, and prediction parsing."""

from .methods import METHOD_ORDER, MethodKind, PredictionMethod, sort_methods
from .parsing import ParseTier, PredictionOutcome, extract_json_object, format_connections, parse_prediction
from .prompts import DecodeParams, PromptBundle, build_prompt, bundle_digest
from .providers import (
    HttpProvider,
    NoisyMockProvider,
    OracleMockProvider,
    ProviderError,
    ProviderSpec,
    RecordingProvider,
    ReplayCache,
    ReplayMissError,
    ReplayProvider,
    ScriptedProvider,
    TransportError,
    build_provider,
    complete,
)

__all__ = [
    "METHOD_ORDER",
    "DecodeParams",
    "HttpProvider",
    "MethodKind",
    "NoisyMockProvider",
    "OracleMockProvider",
    "ParseTier",
    "PredictionMethod",
    "PredictionOutcome",
    "PromptBundle",
    "ProviderError",
    "ProviderSpec",
    "RecordingProvider",
    "ReplayCache",
    "ReplayMissError",
    "ReplayProvider",
    "ScriptedProvider",
    "TransportError",
    "build_prompt",
    "build_provider",
    "bundle_digest",
    "complete",
    "extract_json_object",
    "format_connections",
    "parse_prediction",
    "sort_methods",
]
