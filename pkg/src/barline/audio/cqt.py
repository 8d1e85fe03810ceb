"""Constant-Q transform over the 88 piano bins."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import ceil

import numpy as np
from scipy.signal import fftconvolve

from ..errors import AudioTooShort
from .wave_io import AudioBuffer


@dataclass(frozen=True)
class CqtConfig:
    """Analysis configuration; defaults cover A0-C8 at 16 kHz."""

    sample_rate: int = 16000
    hop: int = 512
    bins: int = 88
    bins_per_octave: int = 12
    f_min: float = 27.5
    log_floor: float = 1e-5

    @property
    def frame_period(self) -> float:
        return self.hop / self.sample_rate

    @property
    def q_factor(self) -> float:
        return 1.0 / (2.0 ** (1.0 / self.bins_per_octave) - 1.0)


def bin_frequencies(config: CqtConfig = CqtConfig()) -> np.ndarray:
    k = np.arange(config.bins)
    return config.f_min * 2.0 ** (k / config.bins_per_octave)


def frame_times(n_frames: int, config: CqtConfig = CqtConfig()) -> np.ndarray:
    return np.arange(n_frames) * config.frame_period


def _kernel(freq: float, config: CqtConfig) -> np.ndarray:
    length = int(ceil(config.q_factor * config.sample_rate / freq))
    n = np.arange(length)
    window = np.hanning(length)
    kernel = window * np.exp(-2j * np.pi * freq * n / config.sample_rate)
    return kernel / window.sum()


def compute_cqt(audio: AudioBuffer, config: CqtConfig = CqtConfig()) -> np.ndarray:
    """Log-magnitude CQT: one row per hop-aligned frame, one column per bin.

    Frame t is centered at sample t*hop; the signal is zero-padded at the
    edges and, when shorter than the longest kernel, padded to fit with an
    AudioTooShort warning.
    """
    if audio.sample_rate != config.sample_rate:
        raise ValueError(
            f"audio at {audio.sample_rate} Hz, config wants {config.sample_rate}")
    samples = audio.samples
    freqs = bin_frequencies(config)
    longest = int(ceil(config.q_factor * config.sample_rate / freqs[0]))
    if len(samples) < longest:
        warnings.warn(
            f"audio of {len(samples)} samples shorter than the longest "
            f"kernel ({longest}); zero-padding", AudioTooShort, stacklevel=2)

    n_frames = len(audio.samples) // config.hop + 1
    positions = np.arange(n_frames) * config.hop
    needed = max(longest, int(positions[-1]) + 1)
    if len(samples) < needed:
        samples = np.concatenate([samples, np.zeros(needed - len(samples))])
    out = np.empty((n_frames, config.bins))
    for k, freq in enumerate(freqs):
        kernel = _kernel(freq, config)
        # correlation of the signal with the kernel, centered per sample
        response = fftconvolve(samples, np.conj(kernel)[::-1], mode="same")
        out[:, k] = np.abs(response[positions])
    return np.log10(np.maximum(out, config.log_floor))
