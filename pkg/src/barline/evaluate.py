"""Per-measure performance evaluation records.

The JSON schema (field names, one record per measure plus a summary) is
fixed; the five scoring formulas are this library's documented
conventions, each computed from the alignment correspondences:

  eva_note       matched / (matched + missing + extra), 1.0 when empty
  eva_speed      min(r, 1/r), r = performed span / nominal span
  eva_stability  1 / (1 + cv) over per-interval local tempo ratios
  eva_tempo_sync min(rho, 1/rho), rho = measure tempo / global median
  eva_all        0.4 note + 0.2 speed + 0.2 stability + 0.2 sync
"""

from __future__ import annotations

import warnings
from bisect import bisect_right
from dataclasses import dataclass
from statistics import median
from typing import Dict, List, Optional, Sequence, Tuple

from .align.result import AlignmentResult
from .errors import EmptyMeasure
from .events import PerformanceNotes, ReferenceEvents, score_to_reference
from .model import Score

_WEIGHTS = {"note": 0.4, "speed": 0.2, "stability": 0.2, "sync": 0.2}


@dataclass(frozen=True)
class MeasureEvaluation:
    measure_id: int
    eva_all: float
    eva_note: float
    eva_speed: float
    eva_stability: float
    eva_tempo_sync: float
    extra_count: int
    matched_count: int
    missing_count: int

    def __post_init__(self):
        for name in ("eva_all", "eva_note", "eva_speed", "eva_stability",
                     "eva_tempo_sync"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} = {value} outside [0, 1]")
        for name in ("extra_count", "matched_count", "missing_count"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} negative")


def evaluation_to_json(record: MeasureEvaluation) -> Dict:
    return {
        "measure_id": record.measure_id,
        "eva_all": record.eva_all,
        "eva_note": record.eva_note,
        "eva_speed": record.eva_speed,
        "eva_stability": record.eva_stability,
        "eva_tempo_sync": record.eva_tempo_sync,
        "extra_count": record.extra_count,
        "matched_count": record.matched_count,
        "missing_count": record.missing_count,
    }


def _ratio_score(ratio: float) -> float:
    if ratio <= 0:
        return 0.0
    return min(ratio, 1.0 / ratio)


def _performed_onset(pair: Tuple[Optional[int], int],
                     performance: PerformanceNotes,
                     correspondences: AlignmentResult) -> Optional[float]:
    p, s = pair
    if p is not None:
        return performance[p].onset_sec
    return correspondences.onsets_sec.get(s)


def _attributed_extras(measure: ReferenceEvents,
                       correspondences: AlignmentResult,
                       performance: PerformanceNotes) -> List[int]:
    """Extras claimed by this measure: each stray note belongs to the
    measure of the last matched event sounding at or before it, and to
    the score's opening measure when nothing precedes it."""
    own = {event.score_index for event in measure}
    if not own:
        return []
    anchors = []
    for pair in correspondences.matched:
        onset = _performed_onset(pair, performance, correspondences)
        if onset is not None:
            anchors.append((onset, pair[1]))
    anchors.sort()
    times = [a[0] for a in anchors]

    claimed = []
    for p in correspondences.extra:
        pos = bisect_right(times, performance[p].onset_sec) - 1
        home = anchors[pos][1] in own if pos >= 0 else 0 in own
        if home:
            claimed.append(p)
    return claimed


def evaluate_measure(measure: ReferenceEvents,
                     correspondences: AlignmentResult,
                     performance: PerformanceNotes,
                     global_tempo: float,
                     measure_id: Optional[int] = None,
                     nominal_tempo: float = 120.0,
                     weights: Optional[Dict[str, float]] = None
                     ) -> MeasureEvaluation:
    """Score one measure's slice of reference events.

    measure is the tuple of reference events belonging to the measure;
    correspondences the full alignment; global_tempo the median
    performed tempo in BPM.  matched_count tallies matched pairs so the
    per-measure counts partition the alignment's.  Spans and intervals
    come from matched events only, so timing scores degrade to 1.0 when
    a measure offers too little evidence rather than punishing sparse
    bars.  weights overrides the eva_all blend (keys note, speed,
    stability, sync).
    """
    weights = dict(_WEIGHTS, **(weights or {}))
    if measure_id is None:
        measure_id = measure[0].measure_index if measure else 0
    if not measure:
        warnings.warn(f"measure {measure_id} has no score events",
                      EmptyMeasure)
        return MeasureEvaluation(
            measure_id=measure_id, eva_all=1.0, eva_note=1.0, eva_speed=1.0,
            eva_stability=1.0, eva_tempo_sync=1.0,
            extra_count=0, matched_count=0, missing_count=0)

    own = {event.score_index for event in measure}
    by_index = {event.score_index: event for event in measure}
    matched_here = [pair for pair in correspondences.matched
                    if pair[1] in own]
    matched_events = sorted({s for _, s in matched_here})
    missing_here = [s for s in correspondences.missing if s in own]
    extra_here = _attributed_extras(measure, correspondences, performance)

    matched_count = len(matched_here)
    missing_count = len(missing_here)
    extra_count = len(extra_here)
    total = matched_count + missing_count + extra_count
    eva_note = matched_count / total if total else 1.0

    # one (nominal onset, performed onset) point per matched event
    points: List[Tuple[float, float]] = []
    for s in matched_events:
        onsets = [_performed_onset((p, q), performance, correspondences)
                  for p, q in matched_here if q == s]
        onsets = [t for t in onsets if t is not None]
        if onsets:
            points.append((by_index[s].onset_sec, min(onsets)))
    points.sort()

    eva_speed = 1.0
    eva_sync = 1.0
    if len(points) >= 2:
        nominal_span = points[-1][0] - points[0][0]
        performed_span = points[-1][1] - points[0][1]
        if nominal_span > 0 and performed_span > 0:
            eva_speed = _ratio_score(performed_span / nominal_span)
            measure_tempo = nominal_tempo * nominal_span / performed_span
            eva_sync = _ratio_score(measure_tempo / global_tempo) \
                if global_tempo > 0 else 1.0
        elif performed_span <= 0:
            eva_speed = 0.0
            eva_sync = 0.0

    ratios = []
    for (n0, p0), (n1, p1) in zip(points, points[1:]):
        if n1 > n0:
            ratios.append((p1 - p0) / (n1 - n0))
    eva_stability = 1.0
    if len(ratios) >= 2:
        mean = sum(ratios) / len(ratios)
        var = sum((r - mean) ** 2 for r in ratios) / len(ratios)
        spread = var ** 0.5
        if abs(mean) > 1e-12:
            eva_stability = 1.0 / (1.0 + spread / abs(mean))
        else:
            eva_stability = 1.0 if spread == 0 else 0.0

    eva_all = (weights["note"] * eva_note + weights["speed"] * eva_speed
               + weights["stability"] * eva_stability
               + weights["sync"] * eva_sync)
    return MeasureEvaluation(
        measure_id=measure_id, eva_all=eva_all, eva_note=eva_note,
        eva_speed=eva_speed, eva_stability=eva_stability,
        eva_tempo_sync=eva_sync, extra_count=extra_count,
        matched_count=matched_count, missing_count=missing_count)


def _measure_tempo(points: List[Tuple[float, float]],
                   nominal_tempo: float) -> Optional[float]:
    if len(points) < 2:
        return None
    nominal_span = points[-1][0] - points[0][0]
    performed_span = points[-1][1] - points[0][1]
    if nominal_span <= 0 or performed_span <= 0:
        return None
    return nominal_tempo * nominal_span / performed_span


def evaluate_performance(score: Score, performance: PerformanceNotes,
                         alignment: AlignmentResult,
                         tempo_bpm: float = 120.0
                         ) -> Tuple[List[MeasureEvaluation], Dict]:
    """One evaluation record per notated measure plus a summary.

    The global tempo is the median of per-measure performed tempos, so
    eva_tempo_sync measures agreement with the performance's own pace
    rather than the nominal marking.  Repeat passes through a measure
    fold into its single notated record.
    """
    reference = score_to_reference(score, tempo_bpm)
    slices: Dict[int, List] = {m.index: [] for m in score.measures}
    for event in reference:
        slices.setdefault(event.measure_index, []).append(event)

    tempos = []
    for index in sorted(slices):
        events = tuple(slices[index])
        own = {e.score_index for e in events}
        points = []
        for p, s in alignment.matched:
            if s in own:
                onset = _performed_onset((p, s), performance, alignment)
                if onset is not None:
                    points.append((reference[s].onset_sec, onset))
        points.sort()
        tempo = _measure_tempo(points, tempo_bpm)
        if tempo is not None:
            tempos.append(tempo)
    global_tempo = median(tempos) if tempos else tempo_bpm

    records = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyMeasure)
        for index in sorted(slices):
            records.append(evaluate_measure(
                tuple(slices[index]), alignment, performance, global_tempo,
                measure_id=index, nominal_tempo=tempo_bpm))

    summary = {
        "eva_all": _mean([r.eva_all for r in records]),
        "eva_note": _mean([r.eva_note for r in records]),
        "eva_speed": _mean([r.eva_speed for r in records]),
        "eva_stability": _mean([r.eva_stability for r in records]),
        "eva_tempo_sync": _mean([r.eva_tempo_sync for r in records]),
        "extra_count": sum(r.extra_count for r in records),
        "matched_count": sum(r.matched_count for r in records),
        "missing_count": sum(r.missing_count for r in records),
    }
    return records, summary


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 1.0


def build_report(piece: str, tempo_bpm: float,
                 records: Sequence[MeasureEvaluation],
                 summary: Dict) -> Dict:
    """Assemble the external report document."""
    return {
        "piece": piece,
        "tempo_bpm": tempo_bpm,
        "measures": [evaluation_to_json(r) for r in records],
        "summary": dict(summary),
    }
