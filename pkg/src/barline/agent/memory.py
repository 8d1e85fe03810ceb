"""Append-only JSONL session memory.

Each session owns sessions/<id>/memory.jsonl. Entries carry a turn
number, a kind tag, a payload string and a timestamp; turns never
decrease and a new turn must be strictly greater than the last.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

ENTRY_KINDS = ("module_output", "retrieved_file", "model_response",
               "user_message")

MEMORY_FILENAME = "memory.jsonl"


@dataclass(frozen=True)
class MemoryEntry:
    turn: int
    kind: str
    payload: str
    timestamp: float

    def __post_init__(self) -> None:
        if self.kind not in ENTRY_KINDS:
            raise ValueError(f"unknown memory kind: {self.kind}")
        if self.turn < 1:
            raise ValueError("turn numbers start at 1")


def _entry_to_json(entry: MemoryEntry) -> str:
    return json.dumps({"turn": entry.turn, "kind": entry.kind,
                       "payload": entry.payload,
                       "timestamp": entry.timestamp})


def _entry_from_json(line: str) -> MemoryEntry:
    raw = json.loads(line)
    return MemoryEntry(turn=int(raw["turn"]), kind=str(raw["kind"]),
                       payload=str(raw["payload"]),
                       timestamp=float(raw["timestamp"]))


class MemoryStore:
    """Backs one session's memory file; appends only, never rewrites."""

    def __init__(self, session_dir: Path) -> None:
        self.path = Path(session_dir) / MEMORY_FILENAME
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._entries: List[MemoryEntry] = []
        if self.path.exists():
            with open(self.path, "r", encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if line:
                        self._entries.append(_entry_from_json(line))

    @property
    def entries(self) -> List[MemoryEntry]:
        return list(self._entries)

    def last_turn(self) -> int:
        return self._entries[-1].turn if self._entries else 0

    def append(self, turn: int, kind: str, payload: str) -> MemoryEntry:
        if turn < self.last_turn():
            raise ValueError("turn numbers may not decrease")
        entry = MemoryEntry(turn=turn, kind=kind, payload=payload,
                            timestamp=time.time())
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(_entry_to_json(entry) + "\n")
        self._entries.append(entry)
        return entry

    def query(self, kind: Optional[str] = None,
              limit: Optional[int] = None) -> List[MemoryEntry]:
        """Most recent first, optionally filtered by kind."""
        found = [e for e in reversed(self._entries)
                 if kind is None or e.kind == kind]
        if limit is not None:
            found = found[:limit]
        return found
