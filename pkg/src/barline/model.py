"""Shared symbolic music model.

All parsers (ABC, MusicXML) produce the same ``Score`` structure so the
aligner and evaluator never care where a score came from.  Durations and
onsets are exact rationals measured in whole notes; one "beat" elsewhere
in the library means a quarter note.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Tuple

from .errors import MeasureOverflow

# Semitone offset of each letter name above C.
_STEP_SEMITONES = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}

PIANO_LOW = 21   # A0
PIANO_HIGH = 108  # C8


@dataclass(frozen=True, order=True)
class Pitch:
    """A spelled pitch: letter step, chromatic alteration, octave.

    ``octave`` follows scientific pitch notation, so C4 is middle C and
    ``Pitch("C", 0, 4).midi_number == 60``.
    """

    step: str
    alter: int
    octave: int

    def __post_init__(self):
        if self.step not in _STEP_SEMITONES:
            raise ValueError(f"bad step {self.step!r}")

    @property
    def midi_number(self) -> int:
        return 12 * (self.octave + 1) + _STEP_SEMITONES[self.step] + self.alter

    @staticmethod
    def from_midi(midi: int, prefer_flats: bool = False) -> "Pitch":
        """Spell a MIDI number, defaulting to sharps for black keys."""
        octave, pc = divmod(midi, 12)
        octave -= 1
        sharp_names = [("C", 0), ("C", 1), ("D", 0), ("D", 1), ("E", 0), ("F", 0),
                       ("F", 1), ("G", 0), ("G", 1), ("A", 0), ("A", 1), ("B", 0)]
        flat_names = [("C", 0), ("D", -1), ("D", 0), ("E", -1), ("E", 0), ("F", 0),
                      ("G", -1), ("G", 0), ("A", -1), ("A", 0), ("B", -1), ("B", 0)]
        step, alter = (flat_names if prefer_flats else sharp_names)[pc]
        return Pitch(step, alter, octave)

    def in_range(self, low: int = PIANO_LOW, high: int = PIANO_HIGH) -> bool:
        return low <= self.midi_number <= high


@dataclass(frozen=True, order=True)
class Duration:
    """An exact duration in whole-note units, stored in lowest terms."""

    numerator: int
    denominator: int

    def __post_init__(self):
        if self.denominator <= 0 or self.numerator < 0:
            raise ValueError(f"bad duration {self.numerator}/{self.denominator}")
        frac = Fraction(self.numerator, self.denominator)
        object.__setattr__(self, "numerator", frac.numerator)
        object.__setattr__(self, "denominator", frac.denominator)

    @staticmethod
    def from_fraction(frac: Fraction) -> "Duration":
        return Duration(frac.numerator, frac.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


@dataclass(frozen=True)
class NoteEvent:
    """One sounding event (note, chord, or rest) inside a measure.

    ``onset`` is a fraction of a whole note from the measure start.  An
    empty ``pitches`` tuple denotes a rest.  Chord pitches are kept
    sorted by MIDI number and must be pairwise distinct.
    """

    onset: Fraction
    duration: Duration
    pitches: Tuple[Pitch, ...] = ()
    voice: str = "1"
    tie_start: bool = False
    tie_end: bool = False

    def __post_init__(self):
        if self.onset < 0:
            raise ValueError("negative onset")
        midis = [p.midi_number for p in self.pitches]
        if len(set(midis)) != len(midis):
            raise ValueError("chord pitches must be distinct")
        ordered = tuple(sorted(self.pitches, key=lambda p: (p.midi_number, p.step)))
        object.__setattr__(self, "pitches", ordered)

    @property
    def is_rest(self) -> bool:
        return not self.pitches

    @property
    def midi_numbers(self) -> Tuple[int, ...]:
        return tuple(p.midi_number for p in self.pitches)


@dataclass(frozen=True)
class Measure:
    """A barline-delimited slice of the score.

    ``time_signature`` is (numerator, denominator); ``key_signature`` is
    (fifths, mode) with sharps positive.  ``pickup`` flags measures whose
    durations legitimately fall short of the meter.
    """

    index: int
    time_signature: Tuple[int, int]
    key_signature: Tuple[int, str] = (0, "major")
    events: Mapping[str, Tuple[NoteEvent, ...]] = field(default_factory=dict)
    pickup: bool = False
    repeat_start: bool = False
    repeat_end: bool = False

    def __post_init__(self):
        frozen = {v: tuple(evs) for v, evs in self.events.items()}
        object.__setattr__(self, "events", frozen)

    @property
    def meter_length(self) -> Fraction:
        num, den = self.time_signature
        return Fraction(num, den)

    def voice_duration(self, voice: str) -> Fraction:
        return sum((e.duration.fraction for e in self.events.get(voice, ())),
                   Fraction(0))

    def validate(self) -> None:
        """Check the meter-sum invariant for every voice."""
        for voice in self.events:
            total = self.voice_duration(voice)
            if total > self.meter_length:
                raise MeasureOverflow(
                    f"measure {self.index} voice {voice}: "
                    f"{total} exceeds meter {self.meter_length}")
            if total < self.meter_length and not self.pickup and total > 0:
                raise MeasureOverflow(
                    f"measure {self.index} voice {voice}: "
                    f"{total} short of meter {self.meter_length} "
                    f"and not flagged as pickup")


@dataclass(frozen=True)
class Score:
    """A complete symbolic piece: ordered measures plus tune metadata."""

    measures: Tuple[Measure, ...]
    title: Optional[str] = None
    composer: Optional[str] = None
    default_unit_length: Fraction = Fraction(1, 8)
    voices: Tuple[str, ...] = ("1",)

    def __post_init__(self):
        object.__setattr__(self, "measures", tuple(self.measures))
        object.__setattr__(self, "voices", tuple(self.voices))

    def validate(self) -> None:
        for i, measure in enumerate(self.measures):
            if measure.index != i:
                raise ValueError(f"measure index {measure.index} at position {i}")
            for voice in measure.events:
                if voice not in self.voices:
                    raise ValueError(f"unknown voice {voice!r} in measure {i}")
            measure.validate()

    def to_json_dict(self) -> dict:
        """Canonical debug dump; field names are part of the interface."""
        return {
            "title": self.title,
            "composer": self.composer,
            "default_unit_length": str(self.default_unit_length),
            "voices": list(self.voices),
            "measures": [
                {
                    "index": m.index,
                    "time_signature": list(m.time_signature),
                    "key_signature": [m.key_signature[0], m.key_signature[1]],
                    "pickup": m.pickup,
                    "repeat_start": m.repeat_start,
                    "repeat_end": m.repeat_end,
                    "events": [
                        {
                            "voice": voice,
                            "onset": str(e.onset),
                            "duration": str(e.duration),
                            "pitches": [p.midi_number for p in e.pitches],
                            "tie_start": e.tie_start,
                            "tie_end": e.tie_end,
                        }
                        for voice in sorted(m.events)
                        for e in m.events[voice]
                    ],
                }
                for m in self.measures
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(), **kwargs)


def event_signature(measure: Measure) -> tuple:
    """Comparable sounding content of one measure: meter plus per-voice notes.

    Rests and all-rest voices are dropped so that explicit rests, implicit
    gaps, and empty measures compare equal.
    """
    voices = {}
    for voice, events in measure.events.items():
        notes = tuple(
            (e.onset, e.duration.fraction, e.midi_numbers, e.tie_start, e.tie_end)
            for e in events if not e.is_rest)
        if notes:
            voices[voice] = notes
    return (measure.time_signature, tuple(sorted(voices.items())))


def scores_event_equivalent(a: Score, b: Score) -> bool:
    """True when two scores carry the same measures, meters, and events."""
    if len(a.measures) != len(b.measures):
        return False
    return all(event_signature(ma) == event_signature(mb)
               for ma, mb in zip(a.measures, b.measures))


def iter_events(score: Score) -> Iterable[Tuple[int, NoteEvent]]:
    """Yield (measure_index, event) over all voices in score order."""
    for measure in score.measures:
        for voice in sorted(measure.events):
            for event in measure.events[voice]:
                yield measure.index, event


def merge_tied_events(events: Sequence[Tuple[Fraction, NoteEvent]]) -> list:
    """Merge tie chains into single sounding events.

    ``events`` holds (absolute_onset, event) pairs for one voice in onset
    order.  A tie_start event absorbs the duration of the following
    tie_end event with the same pitch set.
    """
    merged: list = []
    open_chain: dict = {}
    for onset, event in events:
        key = event.midi_numbers
        if key in open_chain and event.tie_end:
            idx = open_chain.pop(key)
            prev_onset, prev_event, prev_dur = merged[idx]
            merged[idx] = (prev_onset, prev_event, prev_dur + event.duration.fraction)
            if event.tie_start:
                open_chain[key] = idx
            continue
        merged.append((onset, event, event.duration.fraction))
        if event.tie_start:
            open_chain[key] = len(merged) - 1
    return merged
