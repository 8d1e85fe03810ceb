"""MusicXML ingestion fixtures."""

import io
import zipfile

import pytest

from barline.errors import UnsupportedLayout, XmlSyntaxError
from barline.events import score_to_reference
from barline.musicxml import parse_musicxml


def document(measures, divisions=1, parts=None):
    if parts is None:
        parts = {"P1": measures}
    part_list = "".join(
        f'<score-part id="{pid}"><part-name>{pid}</part-name></score-part>'
        for pid in parts)
    body = ""
    for pid, pmeasures in parts.items():
        inner = ""
        for i, content in enumerate(pmeasures):
            attrs = ""
            if i == 0:
                attrs = (f"<attributes><divisions>{divisions}</divisions>"
                         "<key><fifths>0</fifths></key>"
                         "<time><beats>4</beats><beat-type>4</beat-type></time>"
                         "</attributes>")
            inner += f'<measure number="{i + 1}">{attrs}{content}</measure>'
        body += f'<part id="{pid}">{inner}</part>'
    return (f'<score-partwise version="3.1">'
            f'<part-list>{part_list}</part-list>{body}</score-partwise>')


def note(step, octave, duration, chord=False, tie=None, alter=0):
    chord_tag = "<chord/>" if chord else ""
    alter_tag = f"<alter>{alter}</alter>" if alter else ""
    tie_tag = ""
    if tie in ("start", "stop"):
        tie_tag = f'<tie type="{tie}"/>'
    return (f"<note>{chord_tag}<pitch><step>{step}</step>{alter_tag}"
            f"<octave>{octave}</octave></pitch>"
            f"<duration>{duration}</duration>{tie_tag}</note>")


def test_whole_note_c4():
    score = parse_musicxml(document([note("C", 4, 4)]))
    assert len(score.measures) == 1
    events = next(iter(score.measures[0].events.values()))
    assert len(events) == 1
    assert events[0].midi_numbers == (60,)
    assert events[0].duration.fraction == 1


def test_chord_element_merges_pitches():
    content = note("C", 4, 4) + note("E", 4, 4, chord=True) \
        + note("G", 4, 4, chord=True)
    score = parse_musicxml(document([content]))
    events = next(iter(score.measures[0].events.values()))
    assert len(events) == 1
    assert events[0].midi_numbers == (60, 64, 67)


def test_tie_across_barline_sounds_once():
    m1 = note("C", 4, 2) + note("D", 4, 2, tie="start")
    m2 = note("D", 4, 2, tie="stop") + note("E", 4, 2)
    score = parse_musicxml(document([m1, m2]))
    reference = score_to_reference(score, 120.0)
    assert [min(e.pitches) for e in reference] == [60, 62, 64]
    # the tied pair carries the combined duration of one whole note
    assert reference[1].duration_beats == 4


def test_alter_and_rest_handling():
    content = (note("F", 4, 1, alter=1) + "<note><rest/>"
               "<duration>1</duration></note>" + note("B", 3, 2, alter=-1))
    score = parse_musicxml(document([content], divisions=1))
    events = next(iter(score.measures[0].events.values()))
    sounding = [e for e in events if not e.is_rest]
    assert [e.midi_numbers[0] for e in sounding] == [66, 58]


def test_two_parts_become_voices():
    parts = {"P1": [note("C", 4, 4)], "P2": [note("E", 3, 4)]}
    score = parse_musicxml(document([], parts=parts))
    assert set(score.voices) == {"P1", "P2"}
    reference = score_to_reference(score, 120.0)
    assert reference[0].pitches == frozenset({60, 52})


def test_mxl_container_unwraps():
    xml = document([note("C", 4, 4)])
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w") as archive:
        archive.writestr("META-INF/container.xml",
                         '<container><rootfiles><rootfile '
                         'full-path="score.xml"/></rootfiles></container>')
        archive.writestr("score.xml", xml)
    score = parse_musicxml(buffer.getvalue())
    events = next(iter(score.measures[0].events.values()))
    assert events[0].midi_numbers == (60,)


def test_timewise_rejected():
    with pytest.raises(UnsupportedLayout):
        parse_musicxml("<score-timewise></score-timewise>")


def test_malformed_xml_rejected():
    with pytest.raises(XmlSyntaxError):
        parse_musicxml("<score-partwise><unclosed>")


def test_title_and_composer_read():
    xml = document([note("C", 4, 4)])
    xml = xml.replace("<part-list>",
                      "<movement-title>Aria</movement-title>"
                      '<identification><creator type="composer">'
                      "Anna Magdalena</creator></identification><part-list>")
    score = parse_musicxml(xml)
    assert score.title == "Aria"
    assert score.composer == "Anna Magdalena"
