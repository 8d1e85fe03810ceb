"""Deterministic intent routing over user turns.

Attachment types dominate the cascade; keyword lexicons separate
retrieval, follow-up and theory questions when nothing is attached.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Tuple

_AUDIO_SUFFIXES = {".wav"}
_SCORE_SUFFIXES = {".abc", ".xml", ".musicxml", ".mxl"}
_MIDI_SUFFIXES = {".mid", ".midi"}

_RETRIEVAL_RE = re.compile(
    r"\b(give me|find|retrieve|search|look up|play me)\b|\bsong of\b|\"[^\"]+\"")
_FOLLOWUP_RE = re.compile(
    r"^(and|what about|how about|same)\b|\b(previous|that measure|again)\b")
_THEORY_RE = re.compile(
    r"\b(interval|chord|scale|key|harmony|cadence|mode|notation|"
    r"counterpoint|invert\w*|diminished|augmented)\b")

REQUIRED_MODULES = {
    "theory": (),
    "score_analysis": ("symbolic-core", "symbolic-io"),
    "performance_analysis": ("audio-dsp", "hmm-align", "perf-eval"),
    "retrieval_explicit": ("retrieval",),
    "retrieval_implicit": ("retrieval",),
    "followup": (),
}


@dataclass(frozen=True)
class Attachment:
    """One attached file, typed by role rather than container format."""

    kind: str  # audio | score | midi
    path: str

    @staticmethod
    def from_path(path: str) -> "Attachment":
        suffix = Path(path).suffix.lower()
        if suffix in _AUDIO_SUFFIXES:
            return Attachment(kind="audio", path=path)
        if suffix in _MIDI_SUFFIXES:
            return Attachment(kind="midi", path=path)
        if suffix in _SCORE_SUFFIXES:
            return Attachment(kind="score", path=path)
        raise ValueError(f"unrecognized attachment type: {path}")


@dataclass(frozen=True)
class Intent:
    kind: str
    confidence: float
    required_modules: Tuple[str, ...] = field(default_factory=tuple)


def _build(kind: str, confidence: float,
           extra_modules: Sequence[str] = ()) -> Intent:
    modules = tuple(REQUIRED_MODULES[kind]) + tuple(extra_modules)
    return Intent(kind=kind, confidence=confidence,
                  required_modules=modules)


def route_intent(message: str,
                 attachments: Sequence[Attachment] = ()) -> Intent:
    """Rule cascade: attachments first, then lexicons, theory fallback."""
    kinds = {a.kind for a in attachments}
    has_performance = bool(kinds & {"audio", "midi"})
    has_score = "score" in kinds

    if has_performance:
        # without a score the aligner needs an implicitly retrieved one
        extra = () if has_score else ("retrieval",)
        return _build("performance_analysis", 0.95, extra)
    if has_score:
        return _build("score_analysis", 0.9)

    text = message.lower().strip()
    if _RETRIEVAL_RE.search(text):
        return _build("retrieval_explicit", 0.85)
    if _FOLLOWUP_RE.search(text):
        return _build("followup", 0.75)
    if _THEORY_RE.search(text):
        return _build("theory", 0.8)
    return _build("theory", 0.5)
