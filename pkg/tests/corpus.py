"""Seeded fixture generators shared across the test suite.

Everything here is deterministic: the same seed always yields the same
pieces, so tests that freeze counts or rankings stay stable.
"""

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import random

from barline.abcio import serialize_abc
from barline.events import PerformedNote, normalize_performance
from barline.model import Duration, Measure, NoteEvent, Pitch, Score

_MAJOR = (0, 2, 4, 5, 7, 9, 11)


def _scale_pitches(low: int, high: int) -> List[int]:
    return [m for m in range(low, high + 1) if m % 12 in _MAJOR]


def _fill_voice(rng: random.Random, meter_len: Fraction, unit: Fraction,
                voice: str, low: int, high: int,
                chord_p: float, rest_p: float) -> Tuple[NoteEvent, ...]:
    """Events whose durations sum exactly to the meter."""
    palette = _scale_pitches(low, high)
    events = []
    onset = Fraction(0)
    while onset < meter_len:
        remaining = (meter_len - onset) / unit  # in unit multiples
        mult = rng.choice([m for m in (1, 1, 2, 2, 3, 4) if m <= remaining])
        dur = unit * mult
        roll = rng.random()
        if roll < rest_p:
            pitches: Tuple[Pitch, ...] = ()
        elif roll < rest_p + chord_p:
            midis = rng.sample(palette, k=rng.choice([2, 3]))
            pitches = tuple(Pitch.from_midi(m) for m in midis)
        else:
            midi = rng.choice(palette) + rng.choice([0, 0, 0, 0, 1, -1])
            pitches = (Pitch.from_midi(max(low, min(high, midi))),)
        events.append(NoteEvent(onset=onset, duration=Duration.from_fraction(dur),
                                pitches=pitches, voice=voice))
        onset += dur
    return tuple(events)


def make_piece(seed: int, n_measures: int = 6,
               meters: Sequence[Tuple[int, int]] = ((4, 4),),
               unit: Fraction = Fraction(1, 8),
               key: Tuple[int, str] = (0, "major"),
               voices: Sequence[str] = ("1",),
               chord_p: float = 0.2, rest_p: float = 0.1,
               pickup: bool = False,
               tie_measure: Optional[int] = None,
               title: Optional[str] = None) -> Score:
    """One deterministic piece; meters cycles across measures.

    tie_measure, when set, rewrites that measure's first two events into
    a within-measure tied pair on a single pitch.
    """
    rng = random.Random(seed)
    low, high = 48 + rng.randrange(6), 72 + rng.randrange(10)
    measures = []
    for i in range(n_measures):
        meter = meters[min(i * len(meters) // n_measures, len(meters) - 1)]
        meter_len = Fraction(*meter)
        events = {v: _fill_voice(rng, meter_len, unit, v, low, high,
                                 chord_p if v == voices[0] else 0.0, rest_p)
                  for v in voices}
        if pickup and i == 0:
            events = {v: tuple(e for e in evs if e.onset >= meter_len / 2)
                      for v, evs in events.items()}
            events = {
                v: tuple(NoteEvent(onset=e.onset - meter_len / 2,
                                   duration=e.duration, pitches=e.pitches,
                                   voice=v, tie_start=e.tie_start,
                                   tie_end=e.tie_end)
                         for e in evs)
                for v, evs in events.items()}
        if tie_measure == i:
            for v in voices:
                evs = list(events[v])
                if len(evs) >= 2:
                    p = (Pitch.from_midi(rng.choice(_scale_pitches(low, high))),)
                    evs[0] = NoteEvent(onset=evs[0].onset, duration=evs[0].duration,
                                       pitches=p, voice=v, tie_start=True)
                    evs[1] = NoteEvent(onset=evs[1].onset, duration=evs[1].duration,
                                       pitches=p, voice=v, tie_end=True)
                    events[v] = tuple(evs)
        measures.append(Measure(
            index=i, time_signature=meter, key_signature=key, events=events,
            pickup=pickup and i == 0,
            repeat_start=False, repeat_end=False))
    return Score(measures=tuple(measures), title=title,
                 composer=None, default_unit_length=unit,
                 voices=tuple(voices))


def roundtrip_corpus() -> List[Score]:
    """20 pieces spanning meters, unit lengths, keys, chords, and voices."""
    pieces = []
    meters_by_idx = [((4, 4),), ((3, 4),), ((2, 4),), ((6, 8),),
                     ((4, 4), (3, 4))]
    keys = [(0, "major"), (1, "major"), (2, "major"), (-1, "major"),
            (3, "major"), (-2, "major"), (0, "minor"), (2, "minor")]
    for i in range(20):
        pieces.append(make_piece(
            seed=1000 + i,
            n_measures=4 + i % 5,
            meters=meters_by_idx[i % len(meters_by_idx)],
            unit=Fraction(1, 16) if i % 4 == 3 else Fraction(1, 8),
            key=keys[i % len(keys)],
            voices=("1", "2") if i % 7 == 6 else ("1",),
            chord_p=0.0 if i % 3 == 0 else 0.2,
            rest_p=0.15 if i % 2 == 0 else 0.05,
            pickup=i == 5,
            tie_measure=1 if i in (4, 11) else None,
            title=f"Etude {i + 1}",
        ))
    return pieces


def monophonic_corpus() -> List[Score]:
    """Single-voice, single-note pieces for deletion/injection tests."""
    return [make_piece(seed=2000 + i, n_measures=6, chord_p=0.0, rest_p=0.0,
                       title=f"Line {i + 1}")
            for i in range(8)]


# --- retrieval library ----------------------------------------------------

_ADJECTIVES = ("Amber", "Silver", "Hollow", "Velvet", "Quiet", "Scarlet",
               "Winter", "Gilded", "Distant", "Morning")
_NOUNS = ("Brook", "Lantern", "Meadow", "Harbor", "Thicket", "Bellows",
          "Orchard", "Tide", "Garret", "Spire")
_COMPOSERS = ("A. Voss", "M. Keller", "R. Ostrovsky", "L. Fontaine",
              "J. Marsh")


def _interval_walk(rng: random.Random, length: int) -> List[int]:
    steps = [s for s in range(-5, 6) if s != 0]
    return [rng.choice(steps) for _ in range(length)]


def _grams(intervals: Sequence[int], n: int = 4) -> set:
    return {tuple(intervals[i:i + n]) for i in range(len(intervals) - n + 1)}


def library_melodies() -> List[Tuple[str, str, str, List[int]]]:
    """50 (slug, title, composer, pitches) rows with disjoint fingerprints.

    Melodies are 32 notes; interval 4-gram sets are pairwise disjoint by
    rejection sampling, so implicit retrieval has an unambiguous answer.
    """
    rng = random.Random(7)
    taken: set = set()
    rows = []
    for i in range(50):
        while True:
            intervals = _interval_walk(rng, 31)
            grams = _grams(intervals)
            cum = [0]
            for step in intervals:
                cum.append(cum[-1] + step)
            span = max(cum) - min(cum)
            if span <= 34 and not (grams & taken):
                break
        taken |= grams
        start = 66 - (max(cum) + min(cum)) // 2
        pitches = [start + c for c in cum]
        title = f"{_ADJECTIVES[i % 10]} {_NOUNS[i // 10 * 3 % 10]} No. {i + 1}"
        slug = title.lower().replace(" ", "-").replace(".", "")
        rows.append((slug, title, _COMPOSERS[i % 5], pitches))
    return rows


def melody_score(pitches: Sequence[int], title: str,
                 composer: str) -> Score:
    """Straight eighth notes in 4/4, eight notes per measure."""
    assert len(pitches) % 8 == 0
    measures = []
    for m in range(len(pitches) // 8):
        events = tuple(
            NoteEvent(onset=Fraction(j, 8), duration=Duration(1, 8),
                      pitches=(Pitch.from_midi(pitches[m * 8 + j]),))
            for j in range(8))
        measures.append(Measure(index=m, time_signature=(4, 4),
                                events={"1": events}))
    return Score(measures=tuple(measures), title=title, composer=composer)


def write_library(directory) -> List[Tuple[str, str, str, List[int]]]:
    """Materialize the 50-piece library as .abc files; returns the rows."""
    rows = library_melodies()
    for slug, title, composer, pitches in rows:
        text = serialize_abc(melody_score(pitches, title, composer))
        (directory / f"{slug}.abc").write_text(text)
    return rows


def probe_notes(pitches: Sequence[int], transpose: int = 0,
                wrong_at: Optional[int] = None) -> Tuple[PerformedNote, ...]:
    """Mechanical probe rendering at 120 BPM eighth notes."""
    out = []
    for j, midi in enumerate(pitches):
        p = midi + transpose
        if j == wrong_at:
            p += 3 if p < 90 else -3
        out.append(PerformedNote(pitch=p, onset_sec=0.25 * j,
                                 offset_sec=0.25 * j + 0.22))
    return normalize_performance(out)


# --- end-to-end audio fixture ----------------------------------------------


def acceptance_piece() -> Score:
    """16 monophonic 4/4 measures with no immediately repeated pitch.

    Pitch motion is a bounded random walk on the C-major scale; note
    values mix eighths, quarters, and halves so the rendering carries
    both fast and sustained regions.
    """
    rng = random.Random(42)
    scale = _scale_pitches(55, 84)
    pos = scale.index(67)
    measures = []
    prev_midi = None
    for i in range(16):
        events = []
        onset = Fraction(0)
        while onset < 1:
            remaining = (1 - onset) * 8
            mult = rng.choice([m for m in (1, 1, 1, 2, 2, 4) if m <= remaining])
            step = rng.choice([-3, -2, -1, 1, 2, 3])
            pos = max(0, min(len(scale) - 1, pos + step))
            if scale[pos] == prev_midi:
                pos = pos + 1 if pos + 1 < len(scale) else pos - 1
            prev_midi = scale[pos]
            dur = Fraction(mult, 8)
            events.append(NoteEvent(onset=onset,
                                    duration=Duration.from_fraction(dur),
                                    pitches=(Pitch.from_midi(prev_midi),)))
            onset += dur
        measures.append(Measure(index=i, time_signature=(4, 4),
                                events={"1": tuple(events)}))
    return Score(measures=tuple(measures), title="Acceptance Walk")
