"""File-format dispatch and end-to-end alignment recipes.

Shared by the CLI and the HTTP service so both surfaces accept the
same score and performance containers.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .abcio import parse_abc
from .align import (AlignmentResult, align_audio, align_symbolic,
                    sounding_mask_from_energy, train_gmm_bank)
from .audio import AudioBuffer, baseline_transcribe, compute_cqt, load_wav
from .errors import BarlineError
from .events import (PerformanceNotes, notes_from_json, score_to_reference)
from .model import Score
from .musicxml import parse_musicxml
from .smf import parse_midi

SCORE_SUFFIXES = (".abc", ".xml", ".musicxml", ".mxl")
PERFORMANCE_SUFFIXES = (".wav", ".mid", ".midi", ".json")


class UnknownFormat(BarlineError):
    """A file suffix matches no supported container."""


def score_from_bytes(data: bytes, filename: str) -> Score:
    suffix = Path(filename).suffix.lower()
    if suffix == ".abc":
        return parse_abc(data.decode("utf-8"))
    if suffix in (".xml", ".musicxml", ".mxl"):
        return parse_musicxml(data)
    raise UnknownFormat(f"not a score container: {filename}")


def performance_from_bytes(data: bytes, filename: str) -> PerformanceNotes:
    suffix = Path(filename).suffix.lower()
    if suffix in (".mid", ".midi"):
        return parse_midi(data)
    if suffix == ".wav":
        _, _, notes = baseline_transcribe(load_wav(data))
        return notes
    if suffix == ".json":
        return notes_from_json(json.loads(data.decode("utf-8")))
    raise UnknownFormat(f"not a performance container: {filename}")


def load_score(path: Union[str, Path]) -> Score:
    path = Path(path)
    return score_from_bytes(path.read_bytes(), path.name)


def load_performance(path: Union[str, Path]) -> PerformanceNotes:
    path = Path(path)
    return performance_from_bytes(path.read_bytes(), path.name)


def symbolic_alignment(score: Score, performance: PerformanceNotes,
                       tempo_bpm: float) -> AlignmentResult:
    reference = score_to_reference(score, tempo_bpm)
    return align_symbolic(performance, reference)


def audio_alignment(score: Score, audio: AudioBuffer,
                    tempo_bpm: float) -> AlignmentResult:
    """Frame-level route: CQT features scored by a two-class GMM bank.

    The bank is fit on the recording itself, with sounding frames
    labeled by their energy against the recording's own floor.
    """
    reference = score_to_reference(score, tempo_bpm)
    features = compute_cqt(audio)
    mask = sounding_mask_from_energy(features)
    bank = train_gmm_bank(np.asarray(features), mask)
    return align_audio(features, reference, bank)
