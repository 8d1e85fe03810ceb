"""ABC parser: token stream to an immutable Score."""

from __future__ import annotations

import re
import warnings
from dataclasses import replace
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..errors import MeasureOverflow, MissingKeyHeader
from ..model import Duration, Measure, NoteEvent, Pitch, Score
from .keys import key_alterations, parse_key
from .tokenizer import (
    KIND_BARLINE,
    KIND_CHORD_CLOSE,
    KIND_CHORD_OPEN,
    KIND_DECORATION,
    KIND_HEADER,
    KIND_INLINE,
    KIND_KEY,
    KIND_METER,
    KIND_NOTE,
    KIND_REST,
    KIND_TIE,
    KIND_TUPLET,
    KIND_UNIT,
    parse_length,
    split_length_suffix,
    tokenize_abc,
)

_PITCH_RE = re.compile(r"^(\^{1,2}|_{1,2}|=)?([A-Ga-g])([,']*)$")
_ACCIDENTAL_ALTER = {"^": 1, "^^": 2, "_": -1, "__": -2, "=": 0}
_KEY_LINE = re.compile(r"(?m)^[ \t]*K:")


def _parse_meter(value: str) -> Tuple[int, int]:
    value = value.strip()
    if value == "C":
        return 4, 4
    if value == "C|":
        return 2, 2
    match = re.match(r"(\d+)(?:/(\d+))?", value)
    if match is None:
        return 4, 4
    return int(match.group(1)), int(match.group(2) or 4)


def _default_unit(meter: Tuple[int, int]) -> Fraction:
    return Fraction(1, 16) if Fraction(*meter) < Fraction(3, 4) else Fraction(1, 8)


def _tuplet_ratio(lexeme: str, meter: Tuple[int, int]) -> Tuple[Fraction, int]:
    """'(p[:q[:r]]' -> (q/p time factor, r notes affected)."""
    parts = lexeme[1:].split(":")
    p = int(parts[0])
    compound = meter[0] > 3 and meter[0] % 3 == 0
    default_q = {2: 3, 3: 2, 4: 3, 6: 2, 8: 3}.get(p, 3 if compound else 2)
    q = int(parts[1]) if len(parts) > 1 and parts[1] else default_q
    r = int(parts[2]) if len(parts) > 2 and parts[2] else p
    return Fraction(q, p), r


class _Voice:
    """Mutable per-voice accumulator while walking the token stream."""

    def __init__(self, vid: str, meter: Tuple[int, int], unit: Fraction,
                 key: Tuple[int, str]):
        self.id = vid
        self.meter = meter
        self.pending_meter: Optional[Tuple[int, int]] = None
        self.unit = unit
        self.key = key
        self.measure_key = key
        self.key_alters = key_alterations(key[0])
        self.measures: List[dict] = []
        self.events: List[NoteEvent] = []
        self.onset = Fraction(0)
        self.accidentals: Dict[Tuple[str, int], int] = {}
        self.tuplet_factor = Fraction(1)
        self.tuplet_left = 0
        self.broken_next = Fraction(1)
        self.tie_pending = False
        self.next_repeat_start = False
        self.chord: Optional[List[Tuple[Pitch, Fraction]]] = None
        self.chord_tie = False

    def _measure_empty(self) -> bool:
        return not self.events and self.onset == 0

    def set_meter(self, meter: Tuple[int, int]) -> None:
        if self._measure_empty():
            self.meter = meter
            self.pending_meter = None
        else:
            self.pending_meter = meter

    def set_key(self, key: Tuple[int, str]) -> None:
        self.key = key
        self.key_alters = key_alterations(key[0])
        if self._measure_empty():
            self.measure_key = key

    def parse_pitch(self, head: str) -> Pitch:
        match = _PITCH_RE.match(head)
        if match is None:
            raise AssertionError(f"unparseable note head {head!r}")
        acc, letter, marks = match.groups()
        step = letter.upper()
        octave = (5 if letter.islower() else 4) + marks.count("'") - marks.count(",")
        if acc:
            alter = _ACCIDENTAL_ALTER[acc]
            self.accidentals[(step, octave)] = alter
        else:
            alter = self.accidentals.get((step, octave),
                                         self.key_alters.get(step, 0))
        return Pitch(step, alter, octave)

    def append(self, pitches: Tuple[Pitch, ...], mult: Fraction) -> None:
        factor = self.tuplet_factor if self.tuplet_left > 0 else Fraction(1)
        dur = self.unit * mult * factor * self.broken_next
        self.broken_next = Fraction(1)
        if self.tuplet_left > 0:
            self.tuplet_left -= 1
        event = NoteEvent(onset=self.onset, duration=Duration.from_fraction(dur),
                          pitches=pitches, voice=self.id,
                          tie_end=self.tie_pending and bool(pitches))
        self.tie_pending = False
        self.events.append(event)
        self.onset += dur

    def apply_broken(self, lexeme: str) -> None:
        if not self.events:
            return
        k = len(lexeme)
        if lexeme[0] == ">":
            first, second = 2 - Fraction(1, 2 ** k), Fraction(1, 2 ** k)
        else:
            first, second = Fraction(1, 2 ** k), 2 - Fraction(1, 2 ** k)
        prev = self.events[-1]
        new_dur = prev.duration.fraction * first
        self.events[-1] = replace(prev, duration=Duration.from_fraction(new_dur))
        self.onset = prev.onset + new_dur
        self.broken_next = second

    def mark_tie(self) -> None:
        if self.chord is not None:
            self.chord_tie = True
            return
        if self.events and not self.events[-1].is_rest:
            self.events[-1] = replace(self.events[-1], tie_start=True)
            self.tie_pending = True

    def close_measure(self, barline: str) -> None:
        repeat_end = barline in (":|", "::")
        repeat_start_next = barline in ("|:", "::")
        if self._measure_empty():
            # Redundant barline: honor repeat marks, emit nothing.
            if repeat_end and self.measures:
                self.measures[-1]["repeat_end"] = True
            self.next_repeat_start = self.next_repeat_start or repeat_start_next
            return
        meter_len = Fraction(*self.meter)
        if self.onset > meter_len:
            raise MeasureOverflow(
                f"voice {self.id} measure {len(self.measures)}: "
                f"{self.onset} exceeds meter {self.meter[0]}/{self.meter[1]}")
        self.measures.append({
            "meter": self.meter,
            "key": self.measure_key,
            "events": tuple(self.events),
            "pickup": self.onset < meter_len,
            "repeat_start": self.next_repeat_start,
            "repeat_end": repeat_end,
        })
        self.events = []
        self.onset = Fraction(0)
        self.accidentals.clear()
        self.next_repeat_start = repeat_start_next
        if self.pending_meter is not None:
            self.meter = self.pending_meter
            self.pending_meter = None
        self.measure_key = self.key


def parse_abc(text: str) -> Score:
    """Parse ABC source into a Score with one Measure per notated bar."""
    if _KEY_LINE.search(text) is None:
        raise MissingKeyHeader("no K: header line found")
    tokens = tokenize_abc(text)

    title: Optional[str] = None
    composer: Optional[str] = None
    ambient_meter = (4, 4)
    ambient_unit: Optional[Fraction] = None
    ambient_key = (0, "major")
    declared: List[str] = []

    in_body = False
    voices: Dict[str, _Voice] = {}
    order: List[str] = []
    current: Optional[_Voice] = None

    def get_voice(vid: str) -> _Voice:
        if vid not in voices:
            voices[vid] = _Voice(vid, ambient_meter,
                                 ambient_unit if ambient_unit is not None
                                 else _default_unit(ambient_meter),
                                 ambient_key)
            order.append(vid)
        return voices[vid]

    def switch_voice(value: str) -> _Voice:
        vid = value.split()[0] if value.split() else "1"
        return get_voice(vid)

    for tok in tokens:
        kind = tok.kind
        if kind in (KIND_HEADER, KIND_KEY, KIND_METER, KIND_UNIT, KIND_INLINE):
            letter = tok.field_letter
            value = tok.field_value
            if not in_body:
                if letter == "T" and title is None:
                    title = value
                elif letter == "C" and composer is None:
                    composer = value
                elif letter == "M":
                    ambient_meter = _parse_meter(value)
                elif letter == "L":
                    ambient_unit = Fraction(value)
                elif letter == "V":
                    vid = value.split()[0] if value.split() else "1"
                    declared.append(vid)
                elif letter == "K":
                    ambient_key = parse_key(value)
                    in_body = True
                    if ambient_unit is None:
                        ambient_unit = _default_unit(ambient_meter)
                    current = get_voice(declared[0] if declared else "1")
                    for vid in declared[1:]:
                        get_voice(vid)
                continue
            # Field encountered inside the tune body.
            if letter == "M":
                ambient_meter = _parse_meter(value)
                current.set_meter(ambient_meter)
            elif letter == "L":
                ambient_unit = Fraction(value)
                current.unit = ambient_unit
            elif letter == "K":
                ambient_key = parse_key(value)
                current.set_key(ambient_key)
            elif letter == "V":
                current = switch_voice(value)
            continue
        if current is None:
            raise MissingKeyHeader("music before K: header")
        if kind == KIND_NOTE:
            head, suffix = split_length_suffix(tok.lexeme)
            pitch = current.parse_pitch(head)
            mult = parse_length(suffix)
            if current.chord is not None:
                current.chord.append((pitch, mult))
            else:
                current.append((pitch,), mult)
        elif kind == KIND_REST:
            head, suffix = split_length_suffix(tok.lexeme)
            if head in ("Z", "X"):
                count = max(1, int(parse_length(suffix)))
                if not current._measure_empty():
                    current.close_measure("|")
                for _ in range(count):
                    meter_len = Fraction(*current.meter)
                    current.append((), meter_len / current.unit)
                    current.close_measure("|")
            else:
                current.append((), parse_length(suffix))
        elif kind == KIND_CHORD_OPEN:
            current.chord = []
            current.chord_tie = False
        elif kind == KIND_CHORD_CLOSE:
            _, suffix = split_length_suffix(tok.lexeme)
            close_mult = parse_length(suffix)
            notes = current.chord or []
            current.chord = None
            if notes:
                pitches = tuple(dict.fromkeys(p for p, _ in notes))
                mult = max(m for _, m in notes) * close_mult
                current.append(pitches, mult)
                if current.chord_tie:
                    current.mark_tie()
            current.chord_tie = False
        elif kind == KIND_BARLINE:
            current.close_measure(tok.lexeme)
        elif kind == KIND_TUPLET:
            current.tuplet_factor, current.tuplet_left = _tuplet_ratio(
                tok.lexeme, current.meter)
        elif kind == KIND_TIE:
            current.mark_tie()
        elif kind == KIND_DECORATION:
            if tok.lexeme and set(tok.lexeme) <= {"<", ">"}:
                current.apply_broken(tok.lexeme)
            # all other decorations are preserved in text form only

    if current is None:
        raise MissingKeyHeader("no K: header line found")
    for voice in voices.values():
        if not voice._measure_empty():
            voice.close_measure("|")

    return _merge_voices(order, voices, title, composer,
                         ambient_unit if ambient_unit is not None
                         else _default_unit(ambient_meter))


def _merge_voices(order: List[str], voices: Dict[str, _Voice],
                  title: Optional[str], composer: Optional[str],
                  unit: Fraction) -> Score:
    count = max((len(voices[v].measures) for v in order), default=0)
    measures = []
    for i in range(count):
        holders = [voices[v] for v in order if len(voices[v].measures) > i]
        first = holders[0].measures[i]
        for other in holders[1:]:
            if other.measures[i]["meter"] != first["meter"]:
                warnings.warn(
                    f"meter disagreement across voices in measure {i}; "
                    f"using voice {holders[0].id}'s", stacklevel=3)
        events = {}
        pickup = False
        repeat_start = False
        repeat_end = False
        for vid in order:
            recs = voices[vid].measures
            if len(recs) > i:
                rec = recs[i]
                events[vid] = rec["events"]
                pickup = pickup or rec["pickup"]
                repeat_start = repeat_start or rec["repeat_start"]
                repeat_end = repeat_end or rec["repeat_end"]
            else:
                events[vid] = ()
        measures.append(Measure(index=i, time_signature=first["meter"],
                                key_signature=first["key"], events=events,
                                pickup=pickup, repeat_start=repeat_start,
                                repeat_end=repeat_end))
    return Score(measures=tuple(measures), title=title, composer=composer,
                 default_unit_length=unit, voices=tuple(order) or ("1",))
