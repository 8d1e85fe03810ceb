"""Deterministic sine synthesis used by tests, demos, and fixtures."""

from __future__ import annotations

import numpy as np

from ..events import PerformanceNotes, ReferenceEvents, render_performance
from .wave_io import ANALYSIS_RATE, AudioBuffer

_ATTACK_SEC = 0.025
_RELEASE_SEC = 0.080


def _envelope(n: int, sample_rate: int) -> np.ndarray:
    """Raised-cosine attack, exponential decay to ~60%, short release."""
    env = np.ones(n)
    attack = min(n, max(1, int(_ATTACK_SEC * sample_rate)))
    ramp = 0.5 - 0.5 * np.cos(np.pi * np.arange(attack) / attack)
    env[:attack] = ramp
    decay = np.exp(np.linspace(0.0, np.log(0.6), n))
    env *= decay
    release = min(n, max(1, int(_RELEASE_SEC * sample_rate)))
    env[n - release:] *= 0.5 + 0.5 * np.cos(
        np.pi * np.arange(release) / release)
    return env


def midi_frequency(pitch: int) -> float:
    return 440.0 * 2.0 ** ((pitch - 69) / 12.0)


def sine_tone(freq: float, duration_sec: float,
              sample_rate: int = ANALYSIS_RATE,
              amplitude: float = 0.5) -> np.ndarray:
    n = max(1, int(round(duration_sec * sample_rate)))
    t = np.arange(n) / sample_rate
    return amplitude * np.sin(2 * np.pi * freq * t) * _envelope(n, sample_rate)


def render_audio(notes: PerformanceNotes,
                 sample_rate: int = ANALYSIS_RATE,
                 tail_sec: float = 0.25,
                 amplitude: float = 0.3) -> AudioBuffer:
    """Mix one decaying sine per note; peak-normalized below full scale."""
    if not notes:
        return AudioBuffer(samples=np.zeros(int(sample_rate * max(tail_sec, 0.1))),
                           sample_rate=sample_rate)
    end = max(n.offset_sec for n in notes) + tail_sec
    mix = np.zeros(int(round(end * sample_rate)) + 1)
    for note in notes:
        start = int(round(note.onset_sec * sample_rate))
        tone = sine_tone(midi_frequency(note.pitch),
                         note.offset_sec - note.onset_sec,
                         sample_rate,
                         amplitude * (note.velocity / 127.0 + 0.5))
        stop = min(len(mix), start + len(tone))
        mix[start:stop] += tone[:stop - start]
    peak = np.max(np.abs(mix))
    if peak > 0.9:
        mix *= 0.9 / peak
    return AudioBuffer(samples=mix, sample_rate=sample_rate)


def render_reference(reference: ReferenceEvents, tempo_bpm: float,
                     sample_rate: int = ANALYSIS_RATE) -> AudioBuffer:
    """Synthesize a mechanical performance of reference events."""
    return render_audio(render_performance(reference, tempo_bpm),
                        sample_rate=sample_rate)
