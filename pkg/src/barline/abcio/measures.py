"""Measure-level decomposition and reassembly of Scores."""

from __future__ import annotations

import re
import warnings
from dataclasses import replace
from fractions import Fraction
from typing import List, Sequence, Tuple

from ..errors import FragmentParseError
from ..model import Measure, Score
from .parser import parse_abc
from .writer import serialize_abc

_KEY_LINE = re.compile(r"(?m)^[ \t]*K:")
_METER_LINE = re.compile(r"(?m)^[ \t]*M:")


def split_measures(score: Score) -> List[Tuple[str, Tuple[int, int]]]:
    """One self-contained ABC fragment per measure, with its meter."""
    fragments: List[Tuple[str, Tuple[int, int]]] = []
    for measure in score.measures:
        single = replace(measure, index=0)
        frag_score = Score(
            measures=(single,),
            title=score.title if measure.index == 0 else None,
            composer=score.composer if measure.index == 0 else None,
            default_unit_length=score.default_unit_length,
            voices=score.voices,
        )
        fragments.append((serialize_abc(frag_score), measure.time_signature))
    return fragments


def _inject_meter(text: str, timesig: Tuple[int, int]) -> str:
    lines = text.splitlines(keepends=True)
    for j, line in enumerate(lines):
        if line.lstrip().startswith("K:"):
            lines.insert(j, f"M:{timesig[0]}/{timesig[1]}\n")
            return "".join(lines)
    return text


def concat_measures(
        fragments: Sequence[Tuple[str, Tuple[int, int]]]) -> Score:
    """Rebuild a Score from per-measure fragments in input order."""
    title = composer = None
    unit: Fraction = Fraction(1, 8)
    unit_seen = False
    voices: List[str] = []
    measures: List[Measure] = []
    for i, (text, timesig) in enumerate(fragments):
        timesig = (int(timesig[0]), int(timesig[1]))
        if _METER_LINE.search(text) is None:
            text = _inject_meter(text, timesig)
        try:
            parsed = parse_abc(text)
        except FragmentParseError:
            raise
        except Exception as exc:
            raise FragmentParseError(i, str(exc)) from exc
        if not parsed.measures:
            raise FragmentParseError(i, "fragment contains no measures")
        if len(parsed.measures) > 1:
            warnings.warn(f"fragment {i} holds {len(parsed.measures)} "
                          "measures; keeping the first", stacklevel=2)
        measure = parsed.measures[0]
        if tuple(measure.time_signature) != timesig:
            raise FragmentParseError(
                i, f"meter mismatch: fragment carries "
                   f"{measure.time_signature[0]}/{measure.time_signature[1]}, "
                   f"caller supplied {timesig[0]}/{timesig[1]}")
        if title is None:
            title = parsed.title
        if composer is None:
            composer = parsed.composer
        if not unit_seen:
            unit = parsed.default_unit_length
            unit_seen = True
        for vid in parsed.voices:
            if vid not in voices:
                voices.append(vid)
        measures.append(replace(measure, index=len(measures)))
    return Score(measures=tuple(measures), title=title, composer=composer,
                 default_unit_length=unit,
                 voices=tuple(voices) if voices else ("1",))


def expand_repeats(score: Score) -> List[Measure]:
    """Measures in performed order, each repeated span unrolled once.

    Returned measures keep their notated index so callers can map
    performed positions back to the score.
    """
    out: List[Measure] = []
    span_start = 0
    for pos, measure in enumerate(score.measures):
        if measure.repeat_start:
            span_start = pos
        out.append(measure)
        if measure.repeat_end:
            out.extend(score.measures[span_start:pos + 1])
            span_start = pos + 1
    return out
