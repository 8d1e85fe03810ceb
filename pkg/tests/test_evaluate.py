"""Per-measure evaluation records and the report document."""

import json

import numpy as np
import pytest

from barline.abcio import parse_abc
from barline.align import AlignmentResult, align_symbolic
from barline.errors import EmptyMeasure
from barline.evaluate import (MeasureEvaluation, build_report,
                              evaluate_measure, evaluate_performance,
                              evaluation_to_json)
from barline.events import (PerformedNote, normalize_performance,
                            render_performance, score_to_reference)

import corpus


def _scaled(performance, factor):
    return normalize_performance(
        PerformedNote(pitch=n.pitch, onset_sec=n.onset_sec * factor,
                      offset_sec=n.offset_sec * factor,
                      velocity=n.velocity)
        for n in performance)


def _evaluate(piece, performance, tempo=120.0):
    reference = score_to_reference(piece, tempo)
    alignment = align_symbolic(performance, reference)
    return evaluate_performance(piece, performance, alignment, tempo)


def test_perfect_two_note_measure():
    piece = parse_abc("X:1\nM:4/4\nL:1/4\nK:C\nC2 E2|")
    reference = score_to_reference(piece, 120.0)
    performance = render_performance(reference, 120.0)
    alignment = align_symbolic(performance, reference)
    record = evaluate_measure(reference, alignment, performance, 120.0)
    assert record.matched_count == 2
    assert record.missing_count == 0
    assert record.extra_count == 0
    assert record.eva_note == 1.0
    assert record.eva_speed == 1.0
    assert record.eva_tempo_sync == 1.0


def test_empty_measure_convention():
    alignment = AlignmentResult(path=(), matched=(), missing=(), extra=(),
                                onsets_sec={}, log_prob=0.0)
    with pytest.warns(EmptyMeasure):
        record = evaluate_measure((), alignment, (), 120.0, measure_id=3)
    assert record.measure_id == 3
    assert record.eva_all == record.eva_note == 1.0
    assert record.eva_speed == record.eva_stability == 1.0
    assert record.eva_tempo_sync == 1.0
    assert (record.matched_count, record.missing_count,
            record.extra_count) == (0, 0, 0)


def test_one_of_two_notes_missing():
    piece = parse_abc("X:1\nM:4/4\nL:1/4\nK:C\nC2 E2|")
    reference = score_to_reference(piece, 120.0)
    performance = render_performance(reference, 120.0)[:1]
    alignment = align_symbolic(performance, reference)
    record = evaluate_measure(reference, alignment, performance, 120.0)
    assert record.eva_note == 0.5
    assert record.matched_count == 1
    assert record.missing_count == 1


def test_self_rendering_scores_unity():
    piece = corpus.monophonic_corpus()[0]
    reference = score_to_reference(piece, 120.0)
    performance = render_performance(reference, 120.0)
    records, summary = _evaluate(piece, performance)
    assert all(r.eva_note == 1.0 for r in records)
    assert summary["missing_count"] == 0
    assert summary["extra_count"] == 0
    assert summary["eva_all"] == 1.0


def test_uniformly_slower_scores_point_eight():
    piece = corpus.monophonic_corpus()[2]
    reference = score_to_reference(piece, 120.0)
    performance = _scaled(render_performance(reference, 120.0), 1.25)
    records, _ = _evaluate(piece, performance)
    for record in records:
        assert record.eva_speed == pytest.approx(0.8)
        assert record.eva_tempo_sync == pytest.approx(1.0)
        assert record.eva_stability == pytest.approx(1.0)


def test_record_count_equals_measure_count():
    for piece in corpus.roundtrip_corpus()[:6]:
        reference = score_to_reference(piece, 120.0)
        performance = render_performance(reference, 120.0)
        records, _ = _evaluate(piece, performance)
        assert len(records) == len(piece.measures)
        assert [r.measure_id for r in records] == sorted(
            r.measure_id for r in records)


def test_rest_only_measure_gets_unit_record():
    piece = parse_abc("X:1\nM:4/4\nL:1/4\nK:C\nCDEF|z4|GABc|")
    reference = score_to_reference(piece, 120.0)
    performance = render_performance(reference, 120.0)
    records, _ = _evaluate(piece, performance)
    assert len(records) == 3
    middle = records[1]
    assert middle.eva_all == 1.0
    assert (middle.matched_count, middle.missing_count,
            middle.extra_count) == (0, 0, 0)


def test_partition_completeness():
    rng = np.random.default_rng(31)
    for piece in corpus.roundtrip_corpus()[:4]:
        reference = score_to_reference(piece, 120.0)
        performance = list(render_performance(reference, 120.0))
        drop = rng.choice(len(performance),
                          max(1, len(performance) // 12), replace=False)
        kept = [n for i, n in enumerate(performance) if i not in drop]
        anchor = kept[len(kept) // 2]
        kept.append(PerformedNote(pitch=(anchor.pitch + 6) % 128,
                                  onset_sec=anchor.onset_sec + 0.01,
                                  offset_sec=anchor.onset_sec + 0.1))
        performance = normalize_performance(kept)
        alignment = align_symbolic(performance, reference)
        records, summary = evaluate_performance(
            piece, performance, alignment, 120.0)
        assert summary["matched_count"] == len(alignment.matched)
        assert summary["missing_count"] == len(alignment.missing)
        assert summary["extra_count"] == len(alignment.extra)


def test_scores_bounded_under_random_perturbation():
    rng = np.random.default_rng(32)
    piece = corpus.monophonic_corpus()[5]
    reference = score_to_reference(piece, 120.0)
    base = render_performance(reference, 120.0)
    for _ in range(10):
        jitter = []
        for note in base:
            if rng.random() < 0.15:
                continue
            shift = float(rng.normal(scale=0.08))
            pitch = note.pitch + (int(rng.integers(-2, 3))
                                  if rng.random() < 0.2 else 0)
            onset = max(0.0, note.onset_sec + shift)
            jitter.append(PerformedNote(
                pitch=int(np.clip(pitch, 21, 108)), onset_sec=onset,
                offset_sec=onset + max(0.05, note.offset_sec
                                       - note.onset_sec)))
        performance = normalize_performance(jitter)
        alignment = align_symbolic(performance, reference)
        records, summary = evaluate_performance(
            piece, performance, alignment, 120.0)
        for record in records:
            for name in ("eva_all", "eva_note", "eva_speed",
                         "eva_stability", "eva_tempo_sync"):
                assert 0.0 <= getattr(record, name) <= 1.0
        assert 0.0 <= summary["eva_all"] <= 1.0


def test_eva_note_monotone_in_extras():
    piece = corpus.monophonic_corpus()[6]
    reference = score_to_reference(piece, 120.0)
    base = list(render_performance(reference, 120.0))
    scores = []
    for n_extra in range(4):
        noisy = list(base)
        for k in range(n_extra):
            anchor = base[2 + k]
            noisy.append(PerformedNote(
                pitch=anchor.pitch + 6, onset_sec=anchor.onset_sec + 0.02,
                offset_sec=anchor.onset_sec + 0.1))
        performance = normalize_performance(noisy)
        alignment = align_symbolic(performance, reference)
        _, summary = evaluate_performance(
            piece, performance, alignment, 120.0)
        scores.append(summary["eva_note"])
    assert all(b <= a + 1e-12 for a, b in zip(scores, scores[1:]))


FIXTURE_ROW = {
    "measure_id": 37,
    "eva_all": 0.9252619743347168,
    "eva_note": 1.0,
    "eva_speed": 1.0,
    "eva_stability": 0.7282252907752991,
    "eva_tempo_sync": 1.0,
    "extra_count": 0,
    "matched_count": 2,
    "missing_count": 0,
}


def test_fixture_row_round_trips_bit_exact():
    record = MeasureEvaluation(**FIXTURE_ROW)
    document = evaluation_to_json(record)
    assert list(document) == list(FIXTURE_ROW)
    assert json.dumps(document) == json.dumps(FIXTURE_ROW)
    assert "0.9252619743347168" in json.dumps(document)
    assert "0.7282252907752991" in json.dumps(document)
    rebuilt = MeasureEvaluation(**json.loads(json.dumps(document)))
    assert rebuilt == record


def test_field_names_byte_identical():
    names = ("eva_all", "eva_note", "eva_speed", "eva_stability",
             "eva_tempo_sync", "extra_count", "matched_count",
             "missing_count")
    record = MeasureEvaluation(
        measure_id=0, eva_all=1.0, eva_note=1.0, eva_speed=1.0,
        eva_stability=1.0, eva_tempo_sync=1.0, extra_count=0,
        matched_count=0, missing_count=0)
    document = evaluation_to_json(record)
    for name in names:
        assert name in document


def test_build_report_shape():
    piece = corpus.monophonic_corpus()[7]
    reference = score_to_reference(piece, 120.0)
    performance = render_performance(reference, 120.0)
    records, summary = _evaluate(piece, performance)
    report = build_report("Line 8", 120.0, records, summary)
    assert set(report) == {"piece", "tempo_bpm", "measures", "summary"}
    assert report["piece"] == "Line 8"
    assert len(report["measures"]) == len(records)
    assert set(report["summary"]) == {
        "eva_all", "eva_note", "eva_speed", "eva_stability",
        "eva_tempo_sync", "extra_count", "matched_count", "missing_count"}
    json.dumps(report)


def test_weight_override_changes_blend():
    piece = parse_abc("X:1\nM:4/4\nL:1/4\nK:C\nC2 E2|")
    reference = score_to_reference(piece, 120.0)
    performance = render_performance(reference, 120.0)[:1]
    alignment = align_symbolic(performance, reference)
    default = evaluate_measure(reference, alignment, performance, 120.0)
    skewed = evaluate_measure(reference, alignment, performance, 120.0,
                              weights={"note": 1.0, "speed": 0.0,
                                       "stability": 0.0, "sync": 0.0})
    assert default.eva_all != skewed.eva_all
    assert skewed.eva_all == skewed.eva_note


def test_score_validation_bounds():
    with pytest.raises(ValueError):
        MeasureEvaluation(measure_id=0, eva_all=1.2, eva_note=1.0,
                          eva_speed=1.0, eva_stability=1.0,
                          eva_tempo_sync=1.0, extra_count=0,
                          matched_count=0, missing_count=0)
    with pytest.raises(ValueError):
        MeasureEvaluation(measure_id=0, eva_all=1.0, eva_note=1.0,
                          eva_speed=1.0, eva_stability=1.0,
                          eva_tempo_sync=1.0, extra_count=-1,
                          matched_count=0, missing_count=0)
