"""ABC notation front end: tokenizer, parser, serializer, measure tools."""

from .keys import key_alterations, parse_key, render_key
from .measures import concat_measures, expand_repeats, split_measures
from .parser import parse_abc
from .tokenizer import AbcToken, detokenize, parse_length, tokenize_abc
from .writer import serialize_abc

__all__ = [
    "AbcToken",
    "concat_measures",
    "detokenize",
    "expand_repeats",
    "key_alterations",
    "parse_abc",
    "parse_key",
    "parse_length",
    "render_key",
    "serialize_abc",
    "split_measures",
    "tokenize_abc",
]
