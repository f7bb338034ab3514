"""Prompting, LLM clients, and configuration pool sampling."""

from .clients import (
    FixtureStore,
    HttpChatClient,
    LlmClient,
    LlmUnavailable,
    RecordingClient,
    ReplayClient,
    ScriptedClient,
    SerializedClient,
)
from .pool import DEFAULT_RETRY_BUDGET, PoolResult, SampleFailure, generate_pool
from .prompts import (
    CardSource,
    ProblemCard,
    PromptBundle,
    PromptFlags,
    build_config_prompt,
    build_description_prompt,
    load_card,
    parse_config_response,
    parse_descriptions,
)

__all__ = [
    "CardSource",
    "DEFAULT_RETRY_BUDGET",
    "FixtureStore",
    "HttpChatClient",
    "LlmClient",
    "LlmUnavailable",
    "PoolResult",
    "ProblemCard",
    "PromptBundle",
    "PromptFlags",
    "RecordingClient",
    "ReplayClient",
    "SampleFailure",
    "ScriptedClient",
    "SerializedClient",
    "build_config_prompt",
    "build_description_prompt",
    "generate_pool",
    "load_card",
    "parse_config_response",
    "parse_descriptions",
]
