"""Key-signature arithmetic shared by the ABC and MusicXML front ends."""

from __future__ import annotations

import re
from typing import Dict, Tuple

# Circle of fifths for major tonics, index = fifths + 7.
_MAJOR_TONICS = ["Cb", "Gb", "Db", "Ab", "Eb", "Bb", "F",
                 "C", "G", "D", "A", "E", "B", "F#", "C#"]

# Semitone shift of each mode's tonic relative to the major key sharing
# its signature, expressed as a fifths offset.
_MODE_SHIFT = {
    "major": 0, "ionian": 0, "mixolydian": -1, "dorian": -2,
    "minor": -3, "aeolian": -3, "phrygian": -4, "locrian": -5,
    "lydian": 1,
}

_SHARP_ORDER = "FCGDAEB"
_FLAT_ORDER = "BEADGCF"

_KEY_RE = re.compile(r"^([A-Ga-g])([#b]?)\s*(\w*)")


def _mode_from_suffix(suffix: str) -> str:
    s = suffix.lower()
    if s in ("", "maj", "major"):
        return "major"
    if s in ("m", "min", "minor"):
        return "minor"
    for name in ("mixolydian", "dorian", "phrygian", "lydian", "locrian",
                 "aeolian", "ionian"):
        if name.startswith(s[:3]):
            return name
    return "major"


def parse_key(value: str) -> Tuple[int, str]:
    """ABC key field value -> (fifths, mode).  'Em' -> (1, 'minor')."""
    value = value.strip()
    if not value or value.lower() == "none":
        return 0, "major"
    match = _KEY_RE.match(value)
    if match is None:
        return 0, "major"
    letter = match.group(1).upper() + {"#": "#", "b": "b", "": ""}[match.group(2)]
    mode = _mode_from_suffix(match.group(3))
    try:
        tonic_fifths = _MAJOR_TONICS.index(letter) - 7
    except ValueError:
        return 0, "major"
    return tonic_fifths + _MODE_SHIFT.get(mode, 0), mode


def render_key(fifths: int, mode: str) -> str:
    """(fifths, mode) -> ABC key field value.  (1, 'minor') -> 'Em'."""
    shift = _MODE_SHIFT.get(mode, 0)
    index = fifths - shift + 7
    if 0 <= index < len(_MAJOR_TONICS):
        tonic = _MAJOR_TONICS[index]
    else:
        letter = "FCGDAEB"[(index - 6) % 7]
        alter = (index - 6) // 7
        tonic = letter + ("#" * alter if alter > 0 else "b" * -alter)
    suffix = {"major": "", "minor": "m"}.get(mode, mode[:3])
    return tonic + suffix


def key_alterations(fifths: int) -> Dict[str, int]:
    """Per-step default alteration implied by a key signature."""
    alters: Dict[str, int] = {}
    if fifths > 0:
        for step in _SHARP_ORDER[:fifths]:
            alters[step] = 1
    elif fifths < 0:
        for step in _FLAT_ORDER[:-fifths]:
            alters[step] = -1
    return alters
