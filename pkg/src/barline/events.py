"""Performance and reference event lists on a real-time axis.

Beats are quarter notes throughout this module; Score durations arrive in
whole-note units and are scaled by 4 on the way in.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

from .abcio.measures import expand_repeats
from .model import Score, merge_tied_events


@dataclass(frozen=True)
class PerformedNote:
    """One sounding note of a performance, in seconds."""

    pitch: int
    onset_sec: float
    offset_sec: float
    velocity: int = 80

    def __post_init__(self):
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch {self.pitch} outside MIDI range")
        if self.onset_sec < 0:
            raise ValueError(f"negative onset {self.onset_sec}")
        if self.offset_sec <= self.onset_sec:
            raise ValueError(
                f"offset {self.offset_sec} not after onset {self.onset_sec}")
        if not 0 <= self.velocity <= 127:
            raise ValueError(f"velocity {self.velocity} outside MIDI range")


PerformanceNotes = Tuple[PerformedNote, ...]


def normalize_performance(notes: Iterable[PerformedNote]) -> PerformanceNotes:
    """Sort by onset, ties broken by pitch ascending."""
    return tuple(sorted(notes, key=lambda n: (n.onset_sec, n.pitch)))


def notes_to_json(notes: PerformanceNotes) -> List[Dict]:
    return [{"pitch": n.pitch, "onset_sec": n.onset_sec,
             "offset_sec": n.offset_sec, "velocity": n.velocity}
            for n in notes]


def notes_from_json(items: Sequence[Dict]) -> PerformanceNotes:
    return normalize_performance(
        PerformedNote(pitch=int(item["pitch"]),
                      onset_sec=float(item["onset_sec"]),
                      offset_sec=float(item["offset_sec"]),
                      velocity=int(item.get("velocity", 80)))
        for item in items)


@dataclass(frozen=True)
class ReferenceEvent:
    """One score position: a note or chord with nominal timing."""

    score_index: int
    measure_index: int
    onset_beats: Fraction
    onset_sec: float
    pitches: FrozenSet[int]
    duration_beats: Fraction

    def __post_init__(self):
        object.__setattr__(self, "pitches", frozenset(self.pitches))
        object.__setattr__(self, "onset_beats", Fraction(self.onset_beats))
        object.__setattr__(self, "duration_beats", Fraction(self.duration_beats))


ReferenceEvents = Tuple[ReferenceEvent, ...]


def score_to_reference(score: Score, tempo_bpm: float) -> ReferenceEvents:
    """Flatten a Score into chord events with onsets in beats and seconds.

    Repeats are unrolled into performed order, tie chains merge into one
    sounding event, and notes from any voice sharing an exact onset merge
    into a single chord event.
    """
    if tempo_bpm <= 0:
        raise ValueError(f"tempo must be positive, got {tempo_bpm}")
    performed = expand_repeats(score)

    starts: List[Fraction] = []
    measure_idx: List[int] = []
    cursor = Fraction(0)
    for measure in performed:
        starts.append(cursor)
        measure_idx.append(measure.index)
        cursor += measure.meter_length

    voices: List[str] = []
    for measure in performed:
        for vid in measure.events:
            if vid not in voices:
                voices.append(vid)

    # (onset_whole, pitch set, duration_whole) after per-voice tie merging
    sounding: List[Tuple[Fraction, FrozenSet[int], Fraction]] = []
    for vid in voices:
        stream = []
        for pos, measure in enumerate(performed):
            for event in measure.events.get(vid, ()):
                if event.is_rest:
                    continue
                stream.append((starts[pos] + event.onset, event))
        for onset, event, dur in merge_tied_events(stream):
            sounding.append((onset, frozenset(event.midi_numbers), dur))

    by_onset: Dict[Fraction, Tuple[set, List[Fraction]]] = {}
    for onset, pitches, dur in sounding:
        slot = by_onset.setdefault(onset, (set(), []))
        slot[0].update(pitches)
        slot[1].append(dur)

    events: List[ReferenceEvent] = []
    for onset in sorted(by_onset):
        pitches, durs = by_onset[onset]
        pos = bisect_right(starts, onset) - 1
        beats = onset * 4
        events.append(ReferenceEvent(
            score_index=len(events),
            measure_index=measure_idx[max(pos, 0)],
            onset_beats=beats,
            onset_sec=float(beats) * 60.0 / tempo_bpm,
            pitches=frozenset(pitches),
            duration_beats=max(durs) * 4,
        ))
    return tuple(events)


def render_performance(reference: ReferenceEvents, tempo_bpm: float,
                       velocity: int = 80) -> PerformanceNotes:
    """Mechanical rendering of reference events at a given tempo."""
    if tempo_bpm <= 0:
        raise ValueError(f"tempo must be positive, got {tempo_bpm}")
    notes = []
    for event in reference:
        onset = float(event.onset_beats) * 60.0 / tempo_bpm
        dur = float(max(event.duration_beats, Fraction(1, 16))) * 60.0 / tempo_bpm
        for pitch in sorted(event.pitches):
            notes.append(PerformedNote(pitch=pitch, onset_sec=onset,
                                       offset_sec=onset + dur,
                                       velocity=velocity))
    return normalize_performance(notes)
