"""Turn orchestration: route, invoke modules, compose, complete, record.

Every module invocation lands in the trace and in session memory, so a
follow-up turn can answer from the stored evaluation without running
the aligner again.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from ..abcio import parse_abc, serialize_abc
from ..align import align_symbolic, result_to_json
from ..audio import baseline_transcribe, load_wav
from ..errors import BackendTimeout, ModuleFailure
from ..evaluate import build_report, evaluate_performance
from ..events import PerformanceNotes, score_to_reference
from ..library import LibraryIndex, match_implicit, search_explicit
from ..model import Score
from ..musicxml import parse_musicxml
from ..smf import parse_midi
from .backend import CompletionBackend, StubBackend
from .intents import Attachment, Intent, route_intent
from .memory import MemoryEntry, MemoryStore
from .prompts import ContextSection, compose_prompt

DEFAULT_TEMPO_BPM = 120.0


@dataclass
class AgentSession:
    session_id: str
    root: Path
    backend: CompletionBackend
    library: Optional[LibraryIndex] = None
    tempo_bpm: float = DEFAULT_TEMPO_BPM
    memory: MemoryStore = field(init=False)

    def __post_init__(self) -> None:
        self.root = Path(self.root)
        self.memory = MemoryStore(self.root / "sessions" / self.session_id)


def create_session(root: Path, session_id: str,
                   backend: Optional[CompletionBackend] = None,
                   library: Optional[LibraryIndex] = None,
                   tempo_bpm: float = DEFAULT_TEMPO_BPM) -> AgentSession:
    return AgentSession(session_id=session_id, root=Path(root),
                        backend=backend or StubBackend(),
                        library=library, tempo_bpm=tempo_bpm)


def _record(session: AgentSession, turn: int, kind: str, stage: str,
            content: str) -> MemoryEntry:
    payload = json.dumps({"stage": stage, "content": content})
    return session.memory.append(turn, kind, payload)


def payload_content(entry: MemoryEntry, stage: Optional[str] = None
                    ) -> Optional[str]:
    """Decode a stored payload, optionally requiring its stage tag."""
    try:
        raw = json.loads(entry.payload)
    except json.JSONDecodeError:
        return None
    if not isinstance(raw, dict):
        return None
    if stage is not None and raw.get("stage") != stage:
        return None
    return raw.get("content")


def _load_score(attachment: Attachment) -> Score:
    path = Path(attachment.path)
    data = path.read_bytes()
    if path.suffix.lower() == ".abc":
        return parse_abc(data.decode("utf-8"))
    return parse_musicxml(data)


def _load_performance(attachment: Attachment) -> PerformanceNotes:
    data = Path(attachment.path).read_bytes()
    if attachment.kind == "midi":
        return parse_midi(data)
    audio = load_wav(data)
    _, _, notes = baseline_transcribe(audio)
    return notes


def _guard(stage: str, func, *args):
    try:
        return func(*args)
    except (ModuleFailure, BackendTimeout):
        raise
    except Exception as exc:
        raise ModuleFailure(stage, str(exc)) from exc


def extract_query(message: str) -> str:
    """Pull the title-ish search term out of a retrieval request."""
    quoted = re.search(r'"([^"]+)"', message)
    if quoted:
        return quoted.group(1)
    text = message.strip().rstrip("?.!")
    text = re.sub(r"^(please\s+)?(can you\s+)?"
                  r"(give me|find|retrieve|search for|search|look up|"
                  r"play me)\s+", "", text, flags=re.I)
    text = re.sub(r"^(the\s+|an?\s+)?(song|piece|tune|score)\s+"
                  r"(of|called|named)\s+", "", text, flags=re.I)
    text = re.sub(r"\s+for me$", "", text, flags=re.I)
    return text


def _score_from_entry(session: AgentSession, entry_id: str) -> Score:
    assert session.library is not None
    for entry in session.library.entries:
        if entry.id == entry_id:
            raw = Path(entry.path).read_bytes()
            if entry.format == "abc":
                return parse_abc(raw.decode("utf-8"))
            if entry.format in ("xml", "musicxml", "mxl"):
                return parse_musicxml(raw)
            raise ModuleFailure(
                "retrieval", f"entry {entry_id} is not a score source")
    raise ModuleFailure("retrieval", f"no library entry {entry_id}")


def run_turn(session: AgentSession, message: str,
             attachments: Sequence[Attachment] = ()) -> Dict:
    """Process one user turn and return response, trace and intent."""
    turn = session.memory.last_turn() + 1
    _record(session, turn, "user_message", "user", message)

    intent = route_intent(message, attachments)
    trace: List[Dict[str, str]] = []
    sections: List[ContextSection] = []

    def invoke(module: str, detail: str) -> None:
        if module not in intent.required_modules:
            raise ModuleFailure(
                module, f"not in the routed set for {intent.kind}")
        trace.append({"module": module, "detail": detail})

    score: Optional[Score] = None
    score_attachment = next(
        (a for a in attachments if a.kind == "score"), None)
    perf_attachment = next(
        (a for a in attachments if a.kind in ("audio", "midi")), None)

    if intent.kind == "score_analysis":
        assert score_attachment is not None
        score = _guard("symbolic-io", _load_score, score_attachment)
        invoke("symbolic-io", f"parsed {Path(score_attachment.path).name}")
        abc_text = _guard("symbolic-core", serialize_abc, score)
        invoke("symbolic-core", "rendered score text")
        sections.append(ContextSection("SCORE_ABC", abc_text))
        _record(session, turn, "module_output", "symbolic-core", abc_text)

    elif intent.kind == "performance_analysis":
        assert perf_attachment is not None
        performance = _guard("audio-dsp", _load_performance,
                             perf_attachment)
        if perf_attachment.kind == "audio":
            invoke("audio-dsp",
                   f"transcribed {len(performance)} notes")
        if score_attachment is not None:
            score = _guard("hmm-align", _load_score, score_attachment)
        elif session.library is not None:
            hits = _guard("retrieval", match_implicit,
                          session.library, performance)
            if not hits:
                raise ModuleFailure("retrieval",
                                    "no library entry matches the audio")
            invoke("retrieval",
                   f"matched {hits[0].entry_id} ({hits[0].score:.3f})")
            score = _score_from_entry(session, hits[0].entry_id)
            _record(session, turn, "retrieved_file", "retrieval",
                    hits[0].entry_id)
            sections.append(ContextSection(
                "RETRIEVED",
                json.dumps({"entry_id": hits[0].entry_id,
                            "score": round(hits[0].score, 6)})))
        else:
            raise ModuleFailure(
                "retrieval", "no score attached and no library configured")

        reference = _guard("hmm-align", score_to_reference, score,
                           session.tempo_bpm)
        alignment = _guard("hmm-align", align_symbolic, performance,
                           reference)
        invoke("hmm-align",
               f"matched {len(alignment.matched)} of {len(reference)}")
        alignment_json = json.dumps(result_to_json(alignment))
        sections.append(ContextSection("SCORE_ABC", serialize_abc(score)))
        sections.append(ContextSection("ALIGNMENT_JSON", alignment_json))
        _record(session, turn, "module_output", "hmm-align", alignment_json)

        records, summary = _guard("perf-eval", evaluate_performance, score,
                                  performance, alignment, session.tempo_bpm)
        report = build_report(score.title or "untitled", session.tempo_bpm,
                              records, summary)
        invoke("perf-eval", f"evaluated {len(records)} measures")
        report_json = json.dumps(report)
        sections.append(ContextSection("EVALUATION_JSON", report_json))
        _record(session, turn, "module_output", "perf-eval", report_json)

    elif intent.kind == "retrieval_explicit":
        if session.library is None:
            raise ModuleFailure("retrieval", "no library configured")
        hits = _guard("retrieval", search_explicit, session.library,
                      extract_query(message))
        invoke("retrieval", f"{len(hits)} hits")
        listing = [{"entry_id": h.entry_id, "score": round(h.score, 6)}
                   for h in hits[:5]]
        sections.append(ContextSection("RETRIEVED", json.dumps(listing)))
        if hits:
            _record(session, turn, "retrieved_file", "retrieval",
                    hits[0].entry_id)

    elif intent.kind == "followup":
        # answer from memory; no module re-runs
        for entry in session.memory.query(kind="module_output"):
            content = payload_content(entry, stage="perf-eval")
            if content is not None:
                sections.append(ContextSection("EVALUATION_JSON", content))
                break
        history = [payload_content(e) or "" for e in
                   reversed(session.memory.query(kind="model_response",
                                                 limit=3))]
        if history:
            sections.append(ContextSection("HISTORY", "\n".join(history)))

    prompt = compose_prompt(intent.kind, sections, message)
    response = _guard("backend", session.backend.complete, prompt)
    _record(session, turn, "model_response", "backend", response)

    return {
        "session_id": session.session_id,
        "turn": turn,
        "intent": {"kind": intent.kind,
                   "confidence": intent.confidence,
                   "required_modules": list(intent.required_modules)},
        "trace": trace,
        "response": response,
    }
