"""Symbolic music library: indexing, fuzzy metadata search, melody match.

Fingerprints are multisets of pitch-interval n-grams (n = 4) drawn from
the melodic top line, so matching is transposition-invariant by
construction.  The index persists as a single library-index.json file
next to the library.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .abcio import parse_abc, render_key
from .errors import DirectoryUnreadable, ProbeTooShort
from .events import PerformanceNotes, score_to_reference
from .model import Score
from .musicxml import parse_musicxml
from .smf import parse_midi
from .textmetrics import levenshtein

INDEX_FILENAME = "library-index.json"
NGRAM_SIZE = 4
_EXPLICIT_THRESHOLD = 0.5

_FORMATS = {
    ".abc": "abc",
    ".xml": "musicxml",
    ".musicxml": "musicxml",
    ".mxl": "musicxml",
    ".mid": "midi",
    ".midi": "midi",
}


@dataclass(frozen=True)
class LibraryEntry:
    id: str
    title: str
    composer: str
    format: str
    path: str
    metadata: Dict[str, str]
    fingerprint: Dict[Tuple[int, ...], int]


@dataclass(frozen=True)
class RetrievalHit:
    entry_id: str
    score: float
    kind: str


@dataclass
class LibraryIndex:
    entries: List[LibraryEntry] = field(default_factory=list)
    skipped: List[Dict[str, str]] = field(default_factory=list)

    def idf(self) -> Dict[Tuple[int, ...], float]:
        """Inverse document frequency per n-gram over the library."""
        df: Counter = Counter()
        for entry in self.entries:
            df.update(set(entry.fingerprint))
        n = len(self.entries)
        return {gram: math.log((1 + n) / (1 + count)) + 1.0
                for gram, count in df.items()}


def top_line(probe: Union[Score, PerformanceNotes]) -> List[int]:
    """Highest sounding pitch per event, in score or performed order."""
    if isinstance(probe, Score):
        return [max(event.pitches)
                for event in score_to_reference(probe, 120.0)]
    groups: Dict[float, int] = {}
    for note in probe:
        onset = round(note.onset_sec, 6)
        groups[onset] = max(groups.get(onset, 0), note.pitch)
    return [groups[onset] for onset in sorted(groups)]


def interval_ngrams(pitches: Sequence[int],
                    n: int = NGRAM_SIZE) -> Counter:
    intervals = [b - a for a, b in zip(pitches, pitches[1:])]
    return Counter(tuple(intervals[i:i + n])
                   for i in range(len(intervals) - n + 1))


def _entry_from_file(path: Path) -> LibraryEntry:
    kind = _FORMATS[path.suffix.lower()]
    title = path.stem
    composer = ""
    metadata: Dict[str, str] = {}
    if kind == "abc":
        score = parse_abc(path.read_text())
    elif kind == "musicxml":
        score = parse_musicxml(path.read_bytes())
    else:
        notes = parse_midi(path.read_bytes())
        fingerprint = interval_ngrams(top_line(notes))
        return LibraryEntry(
            id=path.stem, title=title, composer=composer, format=kind,
            path=str(path), metadata=metadata, fingerprint=dict(fingerprint))

    if score.title:
        title = score.title
    if score.composer:
        composer = score.composer
    if score.measures:
        first = score.measures[0]
        num, den = first.time_signature
        metadata["meter"] = f"{num}/{den}"
        metadata["key"] = render_key(*first.key_signature)
    fingerprint = interval_ngrams(top_line(score))
    return LibraryEntry(
        id=path.stem, title=title, composer=composer, format=kind,
        path=str(path), metadata=metadata, fingerprint=dict(fingerprint))


def index_library(directory: Union[str, Path]) -> LibraryIndex:
    """Index every parseable piece under a directory.

    Unparseable files land in the skip report instead of failing the
    build; re-indexing an unchanged directory reproduces the index.
    """
    root = Path(directory)
    if not root.is_dir():
        raise DirectoryUnreadable(f"{root} is not a readable directory")
    index = LibraryIndex()
    for path in sorted(root.rglob("*")):
        if path.suffix.lower() not in _FORMATS or not path.is_file():
            continue
        try:
            index.entries.append(_entry_from_file(path))
        except Exception as exc:  # noqa: BLE001 - skip report, never fatal
            index.skipped.append({"path": str(path), "error": str(exc)})
    index.entries.sort(key=lambda e: e.id)
    return index


def save_index(index: LibraryIndex, path: Union[str, Path]) -> None:
    document = {
        "version": 1,
        "entries": [{
            "id": e.id,
            "title": e.title,
            "composer": e.composer,
            "format": e.format,
            "path": e.path,
            "metadata": e.metadata,
            "fingerprint": {",".join(map(str, gram)): count
                            for gram, count in sorted(e.fingerprint.items())},
        } for e in index.entries],
        "skipped": index.skipped,
    }
    Path(path).write_text(json.dumps(document, indent=2) + "\n")


def load_index(path: Union[str, Path]) -> LibraryIndex:
    document = json.loads(Path(path).read_text())
    entries = [LibraryEntry(
        id=raw["id"], title=raw["title"], composer=raw["composer"],
        format=raw["format"], path=raw["path"], metadata=raw["metadata"],
        fingerprint={tuple(int(x) for x in gram.split(",")): count
                     for gram, count in raw["fingerprint"].items()},
    ) for raw in document["entries"]]
    return LibraryIndex(entries=entries, skipped=list(document["skipped"]))


def _fuzzy(query: str, target: str) -> float:
    query = query.casefold()
    target = target.casefold()
    longest = max(len(query), len(target))
    if longest == 0:
        return 0.0
    return 1.0 - levenshtein(query, target) / longest


def search_explicit(index: LibraryIndex, query: str,
                    threshold: float = _EXPLICIT_THRESHOLD
                    ) -> List[RetrievalHit]:
    """Fuzzy title/composer search, best field per entry."""
    hits = []
    for entry in index.entries:
        score = max(_fuzzy(query, entry.title),
                    _fuzzy(query, entry.composer))
        if score >= threshold:
            hits.append(RetrievalHit(entry_id=entry.id, score=score,
                                     kind="explicit"))
    hits.sort(key=lambda h: (-h.score, h.entry_id))
    return hits


def match_implicit(index: LibraryIndex,
                   probe: Union[Score, PerformanceNotes]
                   ) -> List[RetrievalHit]:
    """Rank entries by IDF-weighted Jaccard overlap with the probe."""
    pitches = top_line(probe)
    if len(pitches) < NGRAM_SIZE + 1:
        raise ProbeTooShort(
            f"probe has {len(pitches)} top-line notes, "
            f"need {NGRAM_SIZE + 1}")
    probe_grams = interval_ngrams(pitches)
    idf = index.idf()

    hits = []
    for entry in index.entries:
        grams = set(probe_grams) | set(entry.fingerprint)
        num = 0.0
        den = 0.0
        for gram in grams:
            weight = idf.get(gram, 1.0)
            a = probe_grams.get(gram, 0)
            b = entry.fingerprint.get(gram, 0)
            num += weight * min(a, b)
            den += weight * max(a, b)
        score = num / den if den else 0.0
        if score > 0:
            hits.append(RetrievalHit(entry_id=entry.id, score=score,
                                     kind="implicit"))
    hits.sort(key=lambda h: (-h.score, h.entry_id))
    return hits
