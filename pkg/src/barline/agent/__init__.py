"""Conversation agent: routing, prompting, memory, backends, turns."""

from .backend import (CompletionBackend, HttpBackend, StubBackend,
                      DEFAULT_TIMEOUT_SEC)
from .intents import Attachment, Intent, REQUIRED_MODULES, route_intent
from .memory import ENTRY_KINDS, MemoryEntry, MemoryStore
from .prompts import (AUDIO_PREAMBLE, IMAGE_PREAMBLE, TEXT_PREAMBLE,
                      TRUNCATION_MARKER, ContextSection, compose_prompt,
                      preamble_for)
from .session import (AgentSession, create_session, payload_content,
                      run_turn)

__all__ = [
    "AUDIO_PREAMBLE",
    "AgentSession",
    "Attachment",
    "CompletionBackend",
    "ContextSection",
    "DEFAULT_TIMEOUT_SEC",
    "ENTRY_KINDS",
    "HttpBackend",
    "IMAGE_PREAMBLE",
    "Intent",
    "MemoryEntry",
    "MemoryStore",
    "REQUIRED_MODULES",
    "StubBackend",
    "TEXT_PREAMBLE",
    "TRUNCATION_MARKER",
    "compose_prompt",
    "create_session",
    "payload_content",
    "preamble_for",
    "route_intent",
    "run_turn",
]
