"""Score to ABC text serializer, the inverse of the parser."""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Dict, List, Tuple

from ..errors import UnrepresentableDuration
from ..model import Measure, Pitch, Score
from .keys import key_alterations, render_key

_PER_LINE = 4
_ALTER_MARK = {2: "^^", 1: "^", 0: "=", -1: "_", -2: "__"}

# (pitches, duration fraction, tie_start) triples; rests carry no pitches.
_Item = Tuple[Tuple[Pitch, ...], Fraction, bool]


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    return Fraction(gcd(a.numerator, b.numerator),
                    lcm(a.denominator, b.denominator))


def _voice_items(measure: Measure, voice: str) -> List[_Item]:
    """One voice's events with gap and trailing rests made explicit."""
    items: List[_Item] = []
    t = Fraction(0)
    for event in measure.events.get(voice, ()):
        if event.onset > t:
            items.append(((), event.onset - t, False))
        elif event.onset < t:
            raise UnrepresentableDuration(
                f"overlapping events in measure {measure.index} voice {voice}")
        dur = event.duration.fraction
        items.append((event.pitches, dur, event.tie_start))
        t = event.onset + dur
    if t < measure.meter_length and (not measure.pickup or not items):
        items.append(((), measure.meter_length - t, False))
    return items


def _pitch_text(pitch: Pitch, acc_state: Dict[Tuple[str, int], int],
                key_alters: Dict[str, int]) -> str:
    default = acc_state.get((pitch.step, pitch.octave),
                            key_alters.get(pitch.step, 0))
    mark = ""
    if pitch.alter != default:
        if pitch.alter not in _ALTER_MARK:
            raise UnrepresentableDuration(
                f"alteration {pitch.alter} outside ABC accidental range")
        mark = _ALTER_MARK[pitch.alter]
        acc_state[(pitch.step, pitch.octave)] = pitch.alter
    if pitch.octave <= 4:
        letter = pitch.step + "," * (4 - pitch.octave)
    else:
        letter = pitch.step.lower() + "'" * (pitch.octave - 5)
    return mark + letter


def _suffix(dur: Fraction, unit: Fraction) -> str:
    q = dur / unit
    if q.denominator != 1 or q <= 0:
        raise UnrepresentableDuration(
            f"duration {dur} is not a positive multiple of unit {unit}")
    return "" if q == 1 else str(q.numerator)


def _measure_text(measure: Measure, items: List[_Item], unit: Fraction,
                  prev_meter: Tuple[int, int],
                  prev_key: Tuple[int, str]) -> str:
    parts: List[str] = []
    if measure.time_signature != prev_meter:
        parts.append(f"[M:{measure.time_signature[0]}/{measure.time_signature[1]}]")
    if measure.key_signature != prev_key:
        parts.append(f"[K:{render_key(*measure.key_signature)}]")
    key_alters = key_alterations(measure.key_signature[0])
    acc_state: Dict[Tuple[str, int], int] = {}
    for pitches, dur, tie_start in items:
        if not pitches:
            parts.append("z" + _suffix(dur, unit))
            continue
        if len(pitches) == 1:
            text = _pitch_text(pitches[0], acc_state, key_alters)
        else:
            inner = "".join(_pitch_text(p, acc_state, key_alters)
                            for p in pitches)
            text = f"[{inner}]"
        parts.append(text + _suffix(dur, unit) + ("-" if tie_start else ""))
    return "".join(parts)


def serialize_abc(score: Score) -> str:
    """Render a Score as ABC text that parses back event-equivalently."""
    measures = score.measures
    meter0 = measures[0].time_signature if measures else (4, 4)
    key0 = measures[0].key_signature if measures else (0, "major")

    per_voice: Dict[str, List[List[_Item]]] = {
        vid: [_voice_items(m, vid) for m in measures] for vid in score.voices}
    durations = [dur for columns in per_voice.values()
                 for items in columns for _, dur, _ in items]
    unit = reduce(_frac_gcd, durations) if durations else score.default_unit_length

    lines = ["X:1"]
    if score.title:
        lines.append(f"T:{score.title}")
    if score.composer:
        lines.append(f"C:{score.composer}")
    lines.append(f"M:{meter0[0]}/{meter0[1]}")
    lines.append(f"L:{unit.numerator}/{unit.denominator}")
    multi = tuple(score.voices) != ("1",)
    if multi:
        for vid in score.voices:
            lines.append(f"V:{vid}")
    lines.append(f"K:{render_key(*key0)}")

    for vid in score.voices:
        if multi:
            lines.append(f"V:{vid}")
        lines.extend(_voice_lines(measures, per_voice[vid], unit, meter0, key0))
    return "\n".join(lines) + "\n"


def _voice_lines(measures: Tuple[Measure, ...], columns: List[List[_Item]],
                 unit: Fraction, meter0: Tuple[int, int],
                 key0: Tuple[int, str]) -> List[str]:
    pieces: List[str] = []
    prev_meter, prev_key = meter0, key0
    for i, measure in enumerate(measures):
        text = _measure_text(measure, columns[i], unit, prev_meter, prev_key)
        prev_meter = measure.time_signature
        prev_key = measure.key_signature
        if i + 1 < len(measures):
            nxt = measures[i + 1]
            if measure.repeat_end and nxt.repeat_start:
                bar = "::"
            elif measure.repeat_end:
                bar = ":|"
            elif nxt.repeat_start:
                bar = "|:"
            else:
                bar = "|"
        else:
            bar = ":|" if measure.repeat_end else "|]"
        pieces.append(text + " " + bar)
    if pieces and measures[0].repeat_start:
        pieces[0] = "|: " + pieces[0]
    lines = []
    for start in range(0, len(pieces), _PER_LINE):
        lines.append(" ".join(pieces[start:start + _PER_LINE]))
    return lines
