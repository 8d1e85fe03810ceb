"""WAV ingestion: decode, downmix, resample to the analysis rate."""

from __future__ import annotations

import io
from dataclasses import dataclass
from math import gcd

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from ..errors import EmptyAudio, UnsupportedCodec

ANALYSIS_RATE = 16000


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio with samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"expected mono samples, got shape {samples.shape}")
        if samples.size == 0:
            raise EmptyAudio("audio buffer holds no samples")
        object.__setattr__(self, "samples", samples)

    @property
    def duration_sec(self) -> float:
        return len(self.samples) / self.sample_rate


_INT_SCALE = {np.dtype(np.uint8): (128.0, 128.0),
              np.dtype(np.int16): (0.0, 32768.0),
              np.dtype(np.int32): (0.0, 2147483648.0)}


def load_wav(data: bytes, target_rate: int = ANALYSIS_RATE) -> AudioBuffer:
    """Decode WAV bytes, downmix to mono, resample to target_rate."""
    try:
        rate, raw = wavfile.read(io.BytesIO(data))
    except ValueError as exc:
        raise UnsupportedCodec(str(exc)) from exc
    if raw.size == 0:
        raise EmptyAudio("WAV file holds no samples")

    if raw.dtype in _INT_SCALE:
        offset, scale = _INT_SCALE[raw.dtype]
        samples = (raw.astype(np.float64) - offset) / scale
    elif raw.dtype in (np.float32, np.float64):
        samples = raw.astype(np.float64)
    else:
        raise UnsupportedCodec(f"unsupported WAV sample type {raw.dtype}")

    if samples.ndim == 2:
        samples = samples.mean(axis=1)

    if rate != target_rate:
        g = gcd(target_rate, rate)
        samples = resample_poly(samples, target_rate // g, rate // g)
        if samples.size == 0:
            raise EmptyAudio("audio vanished during resampling")
    samples = np.clip(samples, -1.0, 1.0)
    return AudioBuffer(samples=samples, sample_rate=target_rate)


def write_wav(buffer: AudioBuffer) -> bytes:
    """Encode an AudioBuffer as 16-bit PCM WAV bytes."""
    scaled = np.clip(buffer.samples, -1.0, 1.0)
    pcm = np.round(scaled * 32767.0).astype(np.int16)
    out = io.BytesIO()
    wavfile.write(out, buffer.sample_rate, pcm)
    return out.getvalue()
