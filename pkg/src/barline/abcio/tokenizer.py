"""Lossless tokenizer for ABC notation.

Every byte of the source ends up either in a token lexeme or in the
token's ``trail`` (the whitespace that followed it), so
``detokenize(tokenize_abc(text)) == text`` holds exactly.  Constructs
outside the supported subset are kept as ``decoration`` tokens rather
than dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Tuple

from ..errors import MalformedHeader, UnbalancedChord

# Kinds, in rough precedence order used by the scanner.
KIND_HEADER = "header-field"
KIND_KEY = "key"
KIND_METER = "meter"
KIND_UNIT = "unit-length"
KIND_NOTE = "note"
KIND_REST = "rest"
KIND_CHORD_OPEN = "chord-open"
KIND_CHORD_CLOSE = "chord-close"
KIND_BARLINE = "barline"
KIND_TUPLET = "tuplet"
KIND_TIE = "tie"
KIND_DECORATION = "decoration"
KIND_INLINE = "inline-field"

_FIELD_KINDS = {"K": KIND_KEY, "M": KIND_METER, "L": KIND_UNIT}

_LENGTH = r"\d*(?:/\d*)*"
_MUSIC_PATTERNS: List[Tuple[str, re.Pattern]] = [
    (KIND_INLINE, re.compile(r"\[[A-Za-z]:[^\]\n]*\]")),
    (KIND_BARLINE, re.compile(r"::|:\||\|:|\|\||\|\]|\[\||\|")),
    (KIND_DECORATION, re.compile(r"\[[0-9][0-9,-]*")),       # volta endings
    (KIND_CHORD_OPEN, re.compile(r"\[")),
    (KIND_CHORD_CLOSE, re.compile(r"\]" + _LENGTH)),
    (KIND_TUPLET, re.compile(r"\(\d+(?::\d*){0,2}")),
    (KIND_NOTE, re.compile(r"(?:\^{1,2}|_{1,2}|=)?[A-Ga-g][,']*" + _LENGTH)),
    (KIND_REST, re.compile(r"[zZxX]" + _LENGTH)),
    (KIND_TIE, re.compile(r"-")),
    (KIND_DECORATION, re.compile(r"[<>]+")),                 # broken rhythm
    (KIND_DECORATION, re.compile(r"![^!\n]*!")),
    (KIND_DECORATION, re.compile(r'"[^"\n]*"')),
    (KIND_DECORATION, re.compile(r"\{[^}\n]*\}")),
    (KIND_DECORATION, re.compile(r"\+[^+\n]*\+")),
    (KIND_DECORATION, re.compile(r"%[^\n]*")),
    (KIND_DECORATION, re.compile(r"[^\s]")),                 # any stray char
]

_FIELD_LINE = re.compile(r"[A-Za-z]:")
_WS = re.compile(r"[ \t\r\n]*")


@dataclass
class AbcToken:
    """One lexical unit plus the whitespace that followed it."""

    kind: str
    lexeme: str
    span: Tuple[int, int]
    trail: str = ""

    @property
    def field_letter(self) -> str:
        """Field letter for header/inline tokens ('K' for 'K:G')."""
        text = self.lexeme[1:-1] if self.kind == KIND_INLINE else self.lexeme
        return text[0]

    @property
    def field_value(self) -> str:
        """Field value for header/inline tokens ('G' for 'K:G')."""
        text = self.lexeme[1:-1] if self.kind == KIND_INLINE else self.lexeme
        return text[2:].strip()


def parse_length(suffix: str) -> Fraction:
    """Length multiplier from an ABC suffix: '' -> 1, '3/2' -> 3/2, '//' -> 1/4."""
    if not suffix:
        return Fraction(1)
    match = re.fullmatch(r"(\d*)((?:/\d*)*)", suffix)
    if match is None:
        raise ValueError(f"bad length suffix {suffix!r}")
    value = Fraction(int(match.group(1))) if match.group(1) else Fraction(1)
    for part in re.findall(r"/(\d*)", match.group(2)):
        value /= int(part) if part else 2
    return value


def split_length_suffix(lexeme: str) -> Tuple[str, str]:
    """Split a note/rest/chord-close lexeme into (head, length suffix)."""
    match = re.search(r"(\d*(?:/\d*)*)$", lexeme)
    return lexeme[: match.start(1)], match.group(1)


def tokenize_abc(text: str) -> List[AbcToken]:
    """Tokenize ABC source into a lossless ordered token list.

    Raises UnbalancedChord when a '[' chord is left open at end of line
    and MalformedHeader when a tune-header line lacks its colon.
    """
    tokens: List[AbcToken] = []
    pos = 0
    n = len(text)

    def take_ws(start: int) -> int:
        end = _WS.match(text, start).end()
        if end > start:
            if tokens:
                tokens[-1].trail += text[start:end]
            else:
                tokens.append(AbcToken(KIND_DECORATION, text[start:end],
                                       (start, end)))
        return end

    seen_key = False
    pos = take_ws(pos)
    while pos < n:
        line_end = text.find("\n", pos)
        if line_end == -1:
            line_end = n
        content_end = line_end
        while content_end > pos and text[content_end - 1] in " \t\r":
            content_end -= 1
        line = text[pos:content_end]
        stripped = line.strip()
        if _FIELD_LINE.match(stripped) and not line.startswith(("|", "[")):
            letter = stripped[0]
            kind = _FIELD_KINDS.get(letter, KIND_HEADER)
            if letter == "K":
                seen_key = True
            tokens.append(AbcToken(kind, line, (pos, content_end)))
            pos = take_ws(content_end)
            continue
        if stripped.startswith("%"):
            tokens.append(AbcToken(KIND_DECORATION, line, (pos, content_end)))
            pos = take_ws(content_end)
            continue
        if not seen_key and stripped:
            raise MalformedHeader(f"header line without colon: {stripped!r}")
        # Music line: scan token by token.
        depth = 0
        while pos < line_end:
            if text[pos] in " \t\r":
                pos = take_ws(pos)
                continue
            for kind, pattern in _MUSIC_PATTERNS:
                match = pattern.match(text, pos)
                if match and match.end() <= line_end:
                    break
            else:
                raise AssertionError(f"unscannable input at {pos}")
            lexeme = match.group(0)
            if kind == KIND_CHORD_OPEN:
                depth += 1
            elif kind == KIND_CHORD_CLOSE:
                if depth == 0:
                    raise UnbalancedChord(f"']' without '[' at offset {pos}")
                depth -= 1
            tokens.append(AbcToken(kind, lexeme, (pos, match.end())))
            pos = take_ws(match.end())
        if depth != 0:
            raise UnbalancedChord(f"unclosed chord on line ending at {line_end}")
        pos = take_ws(pos)

    return tokens


def detokenize(tokens: List[AbcToken]) -> str:
    """Inverse of tokenize_abc, byte-for-byte."""
    return "".join(tok.lexeme + tok.trail for tok in tokens)
