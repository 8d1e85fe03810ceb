"""Prompt assembly: modality preamble, labeled context sections, question.

Sections are dropped oldest-first under the character budget, with a
single marker noting the truncation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

TEXT_PREAMBLE = (
    "You are a music expert. Please read the following question carefully "
    "and provide the correct answer based on your knowledge of music theory "
    "and practice.")

IMAGE_PREAMBLE = (
    "You are a music expert. Please analyze the given sheet music image and "
    "select the correct answer to the question based on its notated "
    "content.")

AUDIO_PREAMBLE = (
    "You are a music expert. Please carefully listen to the <measure_id> "
    "section of the provided audio excerpt and answer the question based on "
    "your auditory analysis.")

TRUNCATION_MARKER = "[earlier context truncated]"

# notated-content wording doubles for symbolic score text
_PREAMBLE_BY_KIND = {
    "theory": TEXT_PREAMBLE,
    "retrieval_explicit": TEXT_PREAMBLE,
    "retrieval_implicit": TEXT_PREAMBLE,
    "followup": TEXT_PREAMBLE,
    "score_analysis": IMAGE_PREAMBLE,
    "performance_analysis": AUDIO_PREAMBLE,
}

SECTION_ORDER = ("SCORE_ABC", "ALIGNMENT_JSON", "EVALUATION_JSON",
                 "RETRIEVED", "HISTORY")


@dataclass(frozen=True)
class ContextSection:
    label: str
    content: str


def preamble_for(intent_kind: str, measure_id: str = "") -> str:
    text = _PREAMBLE_BY_KIND.get(intent_kind, TEXT_PREAMBLE)
    if measure_id:
        text = text.replace("<measure_id>", measure_id)
    return text


def compose_prompt(intent_kind: str,
                   sections: Sequence[ContextSection],
                   question: str,
                   budget: int = 16000,
                   measure_id: str = "") -> str:
    """Render preamble + context sections + question within budget chars."""
    head = preamble_for(intent_kind, measure_id)
    tail = f"## QUESTION\n{question}"
    blocks = [f"## {s.label}\n{s.content}" for s in sections]

    def rendered(parts: Sequence[str]) -> str:
        return "\n\n".join([head, *parts, tail])

    kept = list(blocks)
    truncated = False
    while kept and len(rendered(kept)) > budget:
        kept.pop(0)
        truncated = True
    if truncated:
        kept.insert(0, TRUNCATION_MARKER)
    return rendered(kept)
