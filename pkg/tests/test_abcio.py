"""ABC front end: tokenizer losslessness, parser semantics, round trips."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from barline.abcio import (concat_measures, detokenize, parse_abc,
                           parse_key, parse_length, render_key,
                           serialize_abc, split_measures, tokenize_abc)
from barline.abcio.tokenizer import (KIND_CHORD_CLOSE, KIND_CHORD_OPEN,
                                     KIND_KEY, KIND_NOTE, KIND_REST,
                                     split_length_suffix)
from barline.errors import (FragmentParseError, MalformedHeader,
                            MeasureOverflow, MissingKeyHeader,
                            UnbalancedChord)
from barline.model import scores_event_equivalent

import corpus

SCALE = "X:1\nM:4/4\nL:1/4\nK:C\nCDEF|"


# --- tokenizer ------------------------------------------------------------

def test_tokenize_key_header():
    tokens = tokenize_abc("K:G")
    assert len(tokens) == 1
    assert tokens[0].kind == KIND_KEY
    assert tokens[0].field_letter == "K"
    assert tokens[0].field_value == "G"


def test_tokenize_rest_with_length():
    tokens = tokenize_abc("K:C\nz4")
    rest = tokens[-1]
    assert rest.kind == KIND_REST
    head, suffix = split_length_suffix(rest.lexeme)
    assert head == "z"
    assert parse_length(suffix) == 4


def test_tokenize_chord():
    tokens = tokenize_abc("K:C\n[CEG]2")
    kinds = [t.kind for t in tokens[1:]]
    assert kinds == [KIND_CHORD_OPEN, KIND_NOTE, KIND_NOTE, KIND_NOTE,
                     KIND_CHORD_CLOSE]
    assert [t.lexeme for t in tokens[2:5]] == ["C", "E", "G"]
    head, suffix = split_length_suffix(tokens[-1].lexeme)
    assert head == "]"
    assert parse_length(suffix) == 2


def test_tokenize_losslessness_on_corpus():
    for score in corpus.roundtrip_corpus():
        text = serialize_abc(score)
        assert detokenize(tokenize_abc(text)) == text


def test_tokenize_losslessness_crlf():
    text = SCALE.replace("\n", "\r\n") + "\r\n"
    assert detokenize(tokenize_abc(text)) == text


def test_tokenize_unbalanced_chord():
    with pytest.raises(UnbalancedChord):
        tokenize_abc("K:C\n[CEG2|")
    with pytest.raises(UnbalancedChord):
        tokenize_abc("K:C\nCEG]2|")


def test_tokenize_header_without_colon():
    with pytest.raises(MalformedHeader):
        tokenize_abc("X:1\nnot a header\nK:C\nC|")


def test_parse_length_forms():
    assert parse_length("") == 1
    assert parse_length("3") == 3
    assert parse_length("3/2") == Fraction(3, 2)
    assert parse_length("/") == Fraction(1, 2)
    assert parse_length("//") == Fraction(1, 4)


# --- parser ---------------------------------------------------------------

def test_parse_quarter_note_scale():
    score = parse_abc(SCALE)
    assert len(score.measures) == 1
    events = score.measures[0].events["1"]
    assert [e.midi_numbers for e in events] == [(60,), (62,), (64,), (65,)]
    assert all(e.duration.fraction == Fraction(1, 4) for e in events)
    assert [e.onset for e in events] == [Fraction(0), Fraction(1, 4),
                                         Fraction(1, 2), Fraction(3, 4)]


def test_parse_whole_measure_rest():
    score = parse_abc("X:1\nM:4/4\nL:1/4\nK:C\nz4|")
    events = score.measures[0].events["1"]
    assert len(events) == 1
    assert events[0].is_rest
    assert events[0].duration.fraction == 1


def test_parse_three_four_meter():
    score = parse_abc("X:1\nM:3/4\nL:1/4\nK:C\nCDE|FGA|")
    assert len(score.measures) == 2
    for measure in score.measures:
        assert measure.time_signature == (3, 4)
        assert measure.voice_duration("1") == Fraction(3, 4)


def test_parse_octave_conventions():
    score = parse_abc("X:1\nM:4/4\nL:1/4\nK:C\nC c C, c'|")
    events = score.measures[0].events["1"]
    assert [e.midi_numbers[0] for e in events] == [60, 72, 48, 84]


def test_parse_key_signature_applies_accidentals():
    # in D major both F and C carry sharps unless naturalized
    score = parse_abc("X:1\nM:4/4\nL:1/4\nK:D\nF C =F F|")
    events = score.measures[0].events["1"]
    assert [e.midi_numbers[0] for e in events] == [66, 61, 65, 65]


def test_parse_accidental_persists_to_barline():
    score = parse_abc("X:1\nM:4/4\nL:1/4\nK:C\n^F F | F2 z2|")
    first, second = score.measures
    assert [e.midi_numbers[0] for e in first.events["1"][:2]] == [66, 66]
    assert second.events["1"][0].midi_numbers[0] == 65


def test_parse_missing_key_header():
    with pytest.raises(MissingKeyHeader):
        parse_abc("X:1\nM:4/4\nCDEF|")


def test_parse_measure_overflow():
    with pytest.raises(MeasureOverflow):
        parse_abc("X:1\nM:4/4\nL:1/4\nK:C\nCDEFG|")


def test_parse_pickup_measure_allowed():
    score = parse_abc("X:1\nM:4/4\nL:1/4\nK:C\nC|DEFG|")
    assert score.measures[0].pickup
    assert not score.measures[1].pickup


def test_parse_tie_flags():
    score = parse_abc("X:1\nM:4/4\nL:1/4\nK:C\nC2- C2|")
    first, second = score.measures[0].events["1"]
    assert first.tie_start and not first.tie_end
    assert second.tie_end and not second.tie_start


def test_parse_chord_event():
    score = parse_abc("X:1\nM:4/4\nL:1/4\nK:C\n[CEG]4|")
    event = score.measures[0].events["1"][0]
    assert event.midi_numbers == (60, 64, 67)
    assert event.duration.fraction == 1


def test_parse_key_helpers():
    assert parse_key("C") == (0, "major")
    assert parse_key("G") == (1, "major")
    assert parse_key("Am") == (0, "minor")
    assert parse_key("F") == (-1, "major")
    assert render_key(0, "major") == "C"
    assert render_key(1, "major") == "G"
    assert render_key(0, "minor") == "Am"


# --- serializer -----------------------------------------------------------

def test_serialize_quarter_scale_text():
    score = parse_abc(SCALE)
    text = serialize_abc(score)
    assert "L:1/4" in text
    assert "CDEF" in text.replace(" ", "")


def test_serialize_empty_measure_emits_rest():
    score = parse_abc("X:1\nM:4/4\nL:1/4\nK:C\nz4|")
    text = serialize_abc(score)
    music = text.splitlines()[-1]
    assert "z" in music


def test_serialize_chord_syntax():
    score = parse_abc("X:1\nM:4/4\nL:1/4\nK:C\n[CEG]4|")
    assert "[CEG]" in serialize_abc(score)


def test_roundtrip_corpus_event_equivalent():
    for score in corpus.roundtrip_corpus():
        back = parse_abc(serialize_abc(score))
        assert scores_event_equivalent(score, back)


def test_roundtrip_is_fixed_point():
    # parse . serialize . parse equals parse on already-parsed text
    for score in corpus.roundtrip_corpus()[:5]:
        text = serialize_abc(score)
        once = parse_abc(text)
        twice = parse_abc(serialize_abc(once))
        assert scores_event_equivalent(once, twice)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_roundtrip_property_random_pieces(seed):
    score = corpus.make_piece(seed, n_measures=3,
                              chord_p=0.25, rest_p=0.15)
    back = parse_abc(serialize_abc(score))
    assert scores_event_equivalent(score, back)


# --- split / concat -------------------------------------------------------

def test_split_four_measures():
    score = parse_abc("X:1\nM:4/4\nL:1/4\nK:C\nCDEF|GABc|cBAG|FEDC|]")
    fragments = split_measures(score)
    assert len(fragments) == 4
    assert all(ts == (4, 4) for _, ts in fragments)
    for text, _ in fragments:
        piece = parse_abc(text)
        assert len(piece.measures) == 1


def test_split_single_measure():
    score = parse_abc(SCALE)
    assert len(split_measures(score)) == 1


def test_split_carries_meter_change():
    score = parse_abc("X:1\nM:4/4\nL:1/4\nK:C\nCDEF|[M:3/4]GAB|")
    fragments = split_measures(score)
    assert [ts for _, ts in fragments] == [(4, 4), (3, 4)]


def test_concat_inverse_of_split_on_corpus():
    for score in corpus.roundtrip_corpus():
        rebuilt = concat_measures(split_measures(score))
        assert scores_event_equivalent(score, rebuilt)


def test_concat_single_fragment():
    score = concat_measures([("X:1\nM:4/4\nL:1/4\nK:C\nCDEF|", (4, 4))])
    assert len(score.measures) == 1


def test_concat_differing_meters():
    score = concat_measures([
        ("X:1\nM:4/4\nL:1/4\nK:C\nCDEF|", (4, 4)),
        ("X:1\nM:3/4\nL:1/4\nK:C\nGAB|", (3, 4)),
    ])
    assert [m.time_signature for m in score.measures] == [(4, 4), (3, 4)]


def test_concat_reports_fragment_index():
    with pytest.raises(FragmentParseError) as info:
        concat_measures([
            ("X:1\nM:4/4\nL:1/4\nK:C\nCDEF|", (4, 4)),
            ("X:1\nM:4/4\nL:1/4\nK:C\nCDEFG|", (4, 4)),
        ])
    assert info.value.index == 1


def test_concat_meter_mismatch():
    with pytest.raises(FragmentParseError):
        concat_measures([("X:1\nM:4/4\nL:1/4\nK:C\nCDEF|", (3, 4))])
