"""MusicXML reader: partwise documents (.xml or compressed .mxl) to Score."""

from __future__ import annotations

import io
import warnings
import xml.etree.ElementTree as ET
import zipfile
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import TruncatedFile, UnsupportedLayout, XmlSyntaxError
from .model import Duration, Measure, NoteEvent, Pitch, Score


def _unwrap_mxl(data: bytes) -> bytes:
    try:
        archive = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        raise TruncatedFile(f"unreadable mxl container: {exc}") from exc
    with archive:
        rootfile = None
        try:
            container = ET.fromstring(archive.read("META-INF/container.xml"))
            node = container.find(".//rootfile")
            if node is not None:
                rootfile = node.get("full-path")
        except KeyError:
            pass
        if rootfile is None:
            candidates = [n for n in archive.namelist()
                          if n.endswith(".xml") and not n.startswith("META-INF")]
            if not candidates:
                raise TruncatedFile("mxl container holds no score document")
            rootfile = candidates[0]
        try:
            return archive.read(rootfile)
        except KeyError as exc:
            raise TruncatedFile(f"mxl rootfile {rootfile!r} missing") from exc


@dataclass
class _PartState:
    divisions: Fraction = Fraction(1)
    meter: Tuple[int, int] = (4, 4)
    key: Tuple[int, str] = (0, "major")
    ignored: Dict[str, int] = field(default_factory=dict)


def parse_musicxml(document) -> Score:
    """Parse a partwise MusicXML document (str, bytes, or .mxl bytes)."""
    if isinstance(document, bytes):
        if document[:2] == b"PK":
            document = _unwrap_mxl(document)
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise XmlSyntaxError(f"document is not UTF-8: {exc}") from exc
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise XmlSyntaxError(str(exc)) from exc

    if root.tag == "score-timewise":
        raise UnsupportedLayout(
            "timewise documents are not supported; convert to partwise")
    if root.tag != "score-partwise":
        raise UnsupportedLayout(f"unexpected root element <{root.tag}>")

    title = None
    node = root.find("movement-title")
    if node is None:
        node = root.find("work/work-title")
    if node is not None and node.text:
        title = node.text.strip()
    composer = None
    for creator in root.findall("identification/creator"):
        if creator.get("type") == "composer" and creator.text:
            composer = creator.text.strip()
            break

    parts = root.findall("part")
    if not parts:
        raise UnsupportedLayout("document contains no <part> elements")

    # measure column -> voice -> raw event list
    columns: List[Dict[str, List[dict]]] = []
    metas: List[dict] = []
    voice_order: List[str] = []
    ignored: Dict[str, int] = {}

    for p_idx, part in enumerate(parts):
        part_id = part.get("id") or f"P{p_idx + 1}"
        state = _PartState(ignored=ignored)
        raws = []
        inner_ids: List[str] = []
        for m_pos, measure in enumerate(part.findall("measure")):
            raw = _read_measure(measure, state, m_pos)
            raws.append(raw)
            for inner in raw["voices"]:
                if inner not in inner_ids:
                    inner_ids.append(inner)
        names = {inner: part_id if len(inner_ids) <= 1 else f"{part_id}.{inner}"
                 for inner in inner_ids}
        for m_pos, raw in enumerate(raws):
            while len(columns) <= m_pos:
                columns.append({})
                metas.append({})
            meta = metas[m_pos]
            meta.setdefault("meter", raw["meter"])
            meta.setdefault("key", raw["key"])
            meta["repeat_start"] = meta.get("repeat_start", False) or raw["repeat_start"]
            meta["repeat_end"] = meta.get("repeat_end", False) or raw["repeat_end"]
            meta["implicit"] = meta.get("implicit", False) or raw["implicit"]
            for inner, evs in raw["voices"].items():
                vid = names[inner]
                if vid not in voice_order:
                    voice_order.append(vid)
                columns[m_pos].setdefault(vid, []).extend(evs)

    if ignored:
        names = ", ".join(sorted(ignored))
        warnings.warn(f"ignored MusicXML elements: {names}", stacklevel=2)

    measures = []
    for i, column in enumerate(columns):
        meta = metas[i]
        meter = meta.get("meter", (4, 4))
        meter_len = Fraction(*meter)
        events: Dict[str, Tuple[NoteEvent, ...]] = {}
        pickup = bool(meta.get("implicit"))
        for vid in voice_order:
            raw_events = sorted(column.get(vid, ()), key=lambda e: e["onset"])
            built = tuple(
                NoteEvent(onset=e["onset"],
                          duration=Duration.from_fraction(e["duration"]),
                          pitches=tuple(dict.fromkeys(e["pitches"])),
                          voice=vid,
                          tie_start=e["tie_start"], tie_end=e["tie_end"])
                for e in raw_events)
            events[vid] = built
            total = sum((e["duration"] for e in raw_events), Fraction(0))
            if 0 < total < meter_len:
                pickup = True
            elif total > meter_len:
                warnings.warn(
                    f"measure {i} voice {vid} exceeds meter "
                    f"({total} > {meter_len}); keeping events as read",
                    stacklevel=2)
        measures.append(Measure(
            index=i, time_signature=meter, key_signature=meta.get("key", (0, "major")),
            events=events, pickup=pickup,
            repeat_start=bool(meta.get("repeat_start")),
            repeat_end=bool(meta.get("repeat_end"))))

    return Score(measures=tuple(measures), title=title, composer=composer,
                 voices=tuple(voice_order) if voice_order else ("1",))


_IGNORED_NOTATIONS = ("dynamics", "direction", "articulations", "ornaments",
                      "technical", "slur", "wedge", "pedal")


def _read_measure(measure: ET.Element, state: _PartState, m_pos: int) -> dict:
    cursor = Fraction(0)
    voices: Dict[str, List[dict]] = {}
    repeat_start = repeat_end = False
    last_event: Optional[dict] = None

    for elem in measure:
        tag = elem.tag
        if tag == "attributes":
            node = elem.find("divisions")
            if node is not None:
                state.divisions = Fraction(int(node.text))
            node = elem.find("key/fifths")
            if node is not None:
                mode_node = elem.find("key/mode")
                mode = (mode_node.text.strip()
                        if mode_node is not None and mode_node.text else "major")
                state.key = (int(node.text), mode)
            beats = elem.find("time/beats")
            beat_type = elem.find("time/beat-type")
            if beats is not None and beat_type is not None:
                state.meter = (int(beats.text), int(beat_type.text))
        elif tag == "note":
            if elem.find("grace") is not None:
                state.ignored["grace"] = state.ignored.get("grace", 0) + 1
                continue
            dur_node = elem.find("duration")
            if dur_node is None:
                continue
            dur = Fraction(int(dur_node.text)) / (state.divisions * 4)
            is_chord = elem.find("chord") is not None
            voice_node = elem.find("voice")
            inner = voice_node.text.strip() if voice_node is not None and voice_node.text else "1"
            tie_start = any(t.get("type") == "start" for t in elem.findall("tie"))
            tie_end = any(t.get("type") == "stop" for t in elem.findall("tie"))
            if elem.find("rest") is not None:
                pitches: List[Pitch] = []
            else:
                pnode = elem.find("pitch")
                if pnode is None:
                    state.ignored["unpitched"] = state.ignored.get("unpitched", 0) + 1
                    cursor += dur
                    continue
                step = pnode.find("step").text.strip()
                octave = int(pnode.find("octave").text)
                alter_node = pnode.find("alter")
                alter = int(float(alter_node.text)) if alter_node is not None else 0
                pitches = [Pitch(step, alter, octave)]
            if is_chord and last_event is not None and pitches:
                last_event["pitches"].extend(pitches)
                last_event["tie_start"] = last_event["tie_start"] or tie_start
                last_event["tie_end"] = last_event["tie_end"] or tie_end
                continue
            event = {"onset": cursor, "duration": dur, "pitches": pitches,
                     "tie_start": tie_start, "tie_end": tie_end, "inner": inner}
            voices.setdefault(inner, []).append(event)
            last_event = event
            cursor += dur
        elif tag == "backup":
            cursor -= Fraction(int(elem.find("duration").text)) / (state.divisions * 4)
            if cursor < 0:
                warnings.warn(f"backup before measure {m_pos} start; clamped",
                              stacklevel=4)
                cursor = Fraction(0)
            last_event = None
        elif tag == "forward":
            cursor += Fraction(int(elem.find("duration").text)) / (state.divisions * 4)
            last_event = None
        elif tag == "barline":
            repeat = elem.find("repeat")
            if repeat is not None:
                if repeat.get("direction") == "forward":
                    repeat_start = True
                elif repeat.get("direction") == "backward":
                    repeat_end = True
        elif tag in _IGNORED_NOTATIONS:
            state.ignored[tag] = state.ignored.get(tag, 0) + 1

    return {"voices": voices, "repeat_start": repeat_start,
            "repeat_end": repeat_end, "meter": state.meter, "key": state.key,
            "implicit": measure.get("implicit") == "yes"}
