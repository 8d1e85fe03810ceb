"""Audio front end: WAV ingestion, CQT features, PCA, baseline transcriber."""

from .cqt import CqtConfig, bin_frequencies, compute_cqt, frame_times
from .pca import PcaModel, pca_fit, pca_transform
from .synth import render_audio, render_reference, sine_tone
from .transcribe import activations_to_notes, baseline_transcribe
from .wave_io import AudioBuffer, load_wav, write_wav

__all__ = [
    "AudioBuffer",
    "CqtConfig",
    "PcaModel",
    "activations_to_notes",
    "baseline_transcribe",
    "bin_frequencies",
    "compute_cqt",
    "frame_times",
    "load_wav",
    "pca_fit",
    "pca_transform",
    "render_audio",
    "render_reference",
    "sine_tone",
    "write_wav",
]
