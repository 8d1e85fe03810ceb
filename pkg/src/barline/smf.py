"""Standard MIDI File reader and writer (formats 0 and 1)."""

from __future__ import annotations

import struct
import warnings
from typing import Dict, List, Tuple

from .errors import DanglingNoteOn, TruncatedFile, UnsupportedCodec
from .events import PerformanceNotes, PerformedNote, normalize_performance

_DEFAULT_TEMPO = 500000  # microseconds per quarter note


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedFile(
                f"needed {n} bytes at offset {self.pos}, "
                f"file has {len(self.data)}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def byte(self) -> int:
        return self.take(1)[0]

    def varlen(self) -> int:
        value = 0
        for _ in range(4):
            b = self.byte()
            value = (value << 7) | (b & 0x7F)
            if not b & 0x80:
                return value
        raise TruncatedFile("variable-length quantity longer than 4 bytes")


def _track_events(reader: _Reader, length: int) -> List[Tuple[int, int, int, int]]:
    """Decode one MTrk chunk into (tick, kind, a, b) tuples.

    kind is the status high nibble for channel messages, 0x100+type for
    meta events (a, b = data for tempo, else 0).
    """
    end = reader.pos + length
    events = []
    tick = 0
    status = 0
    while reader.pos < end:
        tick += reader.varlen()
        b = reader.byte()
        if b >= 0x80:
            status = b
        else:
            if status < 0x80:
                raise TruncatedFile("running status before any status byte")
            reader.pos -= 1
        if status == 0xFF:
            meta = reader.byte()
            size = reader.varlen()
            payload = reader.take(size)
            if meta == 0x51 and size == 3:
                tempo = (payload[0] << 16) | (payload[1] << 8) | payload[2]
                events.append((tick, 0x151, tempo, 0))
            elif meta == 0x2F:
                break
            status = 0
        elif status in (0xF0, 0xF7):
            size = reader.varlen()
            reader.take(size)
            status = 0
        else:
            kind = status & 0xF0
            channel = status & 0x0F
            if kind in (0x80, 0x90, 0xA0, 0xB0, 0xE0):
                a, b2 = reader.byte(), reader.byte()
            elif kind in (0xC0, 0xD0):
                a, b2 = reader.byte(), 0
            else:
                raise TruncatedFile(f"unexpected status byte 0x{status:02X}")
            if kind == 0x90 and b2 == 0:
                kind = 0x80
            if kind in (0x80, 0x90):
                events.append((tick, kind | channel, a, b2))
    reader.pos = end
    return events


def _tick_to_seconds(tempo_map: List[Tuple[int, int]], ppq: int):
    """Build a tick -> seconds converter from a sorted (tick, tempo) map."""
    anchors = [(0, 0.0, _DEFAULT_TEMPO)]
    for tick, tempo in tempo_map:
        last_tick, last_sec, last_tempo = anchors[-1]
        if tick == last_tick:
            anchors[-1] = (tick, last_sec, tempo)
            continue
        sec = last_sec + (tick - last_tick) * last_tempo / (ppq * 1e6)
        anchors.append((tick, sec, tempo))

    def convert(tick: int) -> float:
        base_tick, base_sec, tempo = anchors[0]
        for anchor in anchors:
            if anchor[0] <= tick:
                base_tick, base_sec, tempo = anchor
            else:
                break
        return base_sec + (tick - base_tick) * tempo / (ppq * 1e6)

    return convert


def parse_midi(data: bytes) -> PerformanceNotes:
    """Decode an SMF format 0/1 file into sorted performed notes."""
    reader = _Reader(data)
    if reader.take(4) != b"MThd":
        raise TruncatedFile("missing MThd header")
    header_len = struct.unpack(">I", reader.take(4))[0]
    if header_len < 6:
        raise TruncatedFile(f"MThd length {header_len} < 6")
    fmt, ntrks, division = struct.unpack(">HHH", reader.take(6))
    reader.take(header_len - 6)
    if fmt not in (0, 1):
        raise UnsupportedCodec(f"SMF format {fmt} not supported")
    if division & 0x8000:
        raise UnsupportedCodec("SMPTE time division not supported")
    if division == 0:
        raise TruncatedFile("zero ticks per quarter note")

    all_events: List[Tuple[int, int, int, int]] = []
    tempo_map: List[Tuple[int, int]] = []
    for _ in range(ntrks):
        if reader.take(4) != b"MTrk":
            raise TruncatedFile("missing MTrk chunk")
        length = struct.unpack(">I", reader.take(4))[0]
        for event in _track_events(reader, length):
            if event[1] == 0x151:
                tempo_map.append((event[0], event[2]))
            else:
                all_events.append(event)

    tempo_map.sort()
    convert = _tick_to_seconds(tempo_map, division)

    # FIFO pairing per (channel, pitch); sort is stable so same-tick
    # note-offs are consumed before note-ons (0x8c < 0x9c).
    all_events.sort(key=lambda e: (e[0], e[1]))
    open_notes: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
    notes: List[PerformedNote] = []
    last_tick = 0
    for tick, status, pitch, velocity in all_events:
        last_tick = max(last_tick, tick)
        key = (status & 0x0F, pitch)
        if status & 0xF0 == 0x90:
            open_notes.setdefault(key, []).append((tick, velocity))
        else:
            queue = open_notes.get(key)
            if not queue:
                continue
            on_tick, on_vel = queue.pop(0)
            if tick > on_tick:
                notes.append(PerformedNote(
                    pitch=pitch, onset_sec=convert(on_tick),
                    offset_sec=convert(tick), velocity=on_vel))

    dangling = sum(len(q) for q in open_notes.values())
    if dangling:
        warnings.warn(
            f"{dangling} note-on events without note-off; closed at track end",
            DanglingNoteOn, stacklevel=2)
        close_tick = last_tick if last_tick > 0 else division
        for (channel, pitch), queue in open_notes.items():
            for on_tick, on_vel in queue:
                end_tick = close_tick if close_tick > on_tick else on_tick + division
                notes.append(PerformedNote(
                    pitch=pitch, onset_sec=convert(on_tick),
                    offset_sec=convert(end_tick), velocity=on_vel))

    return normalize_performance(notes)


def _encode_varlen(value: int) -> bytes:
    chunks = [value & 0x7F]
    value >>= 7
    while value:
        chunks.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(chunks))


def export_midi(notes: PerformanceNotes, ppq: int = 480,
                tempo_bpm: float = 120.0) -> bytes:
    """Write notes as a single-track SMF format 0 file."""
    if ppq <= 0 or tempo_bpm <= 0:
        raise ValueError("ppq and tempo_bpm must be positive")
    tempo = max(1, round(60e6 / tempo_bpm))
    sec_per_tick = tempo / (ppq * 1e6)

    # (tick, order, status, pitch, velocity); offs sort before ons per tick
    raw: List[Tuple[int, int, int, int, int]] = []
    for note in notes:
        on_tick = round(note.onset_sec / sec_per_tick)
        off_tick = max(on_tick + 1, round(note.offset_sec / sec_per_tick))
        raw.append((on_tick, 1, 0x90, note.pitch, note.velocity))
        raw.append((off_tick, 0, 0x80, note.pitch, 0))
    raw.sort()

    body = bytearray()
    body += _encode_varlen(0) + bytes(
        [0xFF, 0x51, 0x03, (tempo >> 16) & 0xFF, (tempo >> 8) & 0xFF, tempo & 0xFF])
    cursor = 0
    for tick, _, status, pitch, velocity in raw:
        body += _encode_varlen(tick - cursor)
        body += bytes([status, pitch, velocity])
        cursor = tick
    body += _encode_varlen(0) + bytes([0xFF, 0x2F, 0x00])

    header = b"MThd" + struct.pack(">IHHH", 6, 0, 1, ppq)
    track = b"MTrk" + struct.pack(">I", len(body)) + bytes(body)
    return header + track
