"""Deterministic baseline transcriber over CQT features.

Stands in for a learned acoustic model: it emits the same onset/frame
activation matrices a neural front end would, so downstream consumers are
agnostic to the producer.
"""

from __future__ import annotations

from math import ceil
from typing import Dict, List, Tuple

import numpy as np
from scipy.ndimage import uniform_filter1d

from ..errors import ShapeMismatch
from ..events import PerformanceNotes, PerformedNote, normalize_performance
from .cqt import CqtConfig, compute_cqt
from .wave_io import AudioBuffer

PITCH_OFFSET = 21  # bin 0 = A0
_MIN_INTER_ONSET_SEC = 0.05
_FLUX_WINDOW_SEC = 0.5


def activations_to_notes(onsets: np.ndarray, frames: np.ndarray,
                         threshold: float = 0.5,
                         frame_period: float = CqtConfig().frame_period
                         ) -> PerformanceNotes:
    """Decode activation matrices into notes.

    A note starts at each onset peak (>= threshold, local maximum within
    one frame on its pitch) and extends while the frame activation stays
    at or above threshold, stopping early at the next onset peak.
    """
    onsets = np.asarray(onsets, dtype=np.float64)
    frames = np.asarray(frames, dtype=np.float64)
    if onsets.shape != frames.shape:
        raise ShapeMismatch(
            f"onsets {onsets.shape} vs frames {frames.shape}")
    if onsets.ndim != 2:
        raise ShapeMismatch(f"expected 2-D matrices, got {onsets.ndim}-D")

    n_frames, n_bins = onsets.shape
    notes: List[PerformedNote] = []
    for k in range(n_bins):
        column = onsets[:, k]
        peaks = []
        for t in range(n_frames):
            if column[t] < threshold:
                continue
            prev = column[t - 1] if t > 0 else -np.inf
            nxt = column[t + 1] if t + 1 < n_frames else -np.inf
            if column[t] > prev and column[t] >= nxt:
                peaks.append(t)
        for i, start in enumerate(peaks):
            limit = peaks[i + 1] if i + 1 < len(peaks) else n_frames
            end = start + 1
            while end < limit and frames[end, k] >= threshold:
                end += 1
            notes.append(PerformedNote(
                pitch=PITCH_OFFSET + k,
                onset_sec=start * frame_period,
                offset_sec=end * frame_period,
                velocity=80))
    return normalize_performance(notes)


def baseline_transcribe(audio: AudioBuffer,
                        config: CqtConfig = CqtConfig(),
                        delta: float = 0.05
                        ) -> Tuple[np.ndarray, np.ndarray, PerformanceNotes]:
    """Transcribe audio into (onset matrix, frame matrix, notes).

    Frames: log-CQT energy min-max normalized per bin onto [0, 1].
    Onsets: half-wave rectified spectral flux of the linear magnitudes
    (log-domain flux overweights quiet bins, so note-boundary transients
    would outshine real attacks in bins pre-lit by neighbour leakage),
    normalized per recording, then peak-picked against a
    local-mean-plus-delta adaptive threshold with a cross-bin
    local-maximum constraint.  The 50 ms minimum inter-onset gap keeps
    the strongest peak in each cluster, not the earliest.  Accepted peaks
    are rescaled into [0.5, 1] so the matrices decode with the standard
    0.5 threshold.
    """
    feat = compute_cqt(audio, config)
    n_frames, n_bins = feat.shape

    lo = feat.min(axis=0)
    span = feat.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    frames = np.where(span > 0, (feat - lo) / safe, 0.0)

    magnitude = 10.0 ** feat
    baseline = np.full((1, n_bins), config.log_floor)
    flux = np.maximum(np.diff(magnitude, axis=0, prepend=baseline), 0.0)
    peak_flux = flux.max()
    if peak_flux > 0:
        flux = flux / peak_flux

    window = max(1, int(round(_FLUX_WINDOW_SEC / config.frame_period)))
    local_mean = uniform_filter1d(flux, size=window, axis=0, mode="nearest")
    gate = flux >= (local_mean + delta)

    min_gap = max(1, ceil(_MIN_INTER_ONSET_SEC / config.frame_period))
    per_bin: List[Dict[int, float]] = [{} for _ in range(n_bins)]
    for k in range(n_bins):
        for t in range(n_frames):
            if not gate[t, k]:
                continue
            value = flux[t, k]
            prev = flux[t - 1, k] if t > 0 else -np.inf
            nxt = flux[t + 1, k] if t + 1 < n_frames else -np.inf
            if not (value > prev and value >= nxt):
                continue
            left = flux[t, k - 1] if k > 0 else -np.inf
            right = flux[t, k + 1] if k + 1 < n_bins else -np.inf
            if value < left or value < right:
                continue
            per_bin[k][t] = value

    def outshone(k: int, t: int, value: float) -> bool:
        # neighbour leakage can crest a frame before its source, so a
        # strictly larger adjacent-bin candidate within one frame marks
        # this one as spill, whichever peaked first
        for nk in (k - 1, k + 1):
            if not 0 <= nk < n_bins:
                continue
            for nt in (t - 1, t, t + 1):
                if per_bin[nk].get(nt, -np.inf) > value:
                    return True
        return False

    onsets = np.zeros_like(feat)
    for k in range(n_bins):
        candidates = [(value, t) for t, value in per_bin[k].items()
                      if not outshone(k, t, value)]
        candidates.sort(key=lambda c: (-c[0], c[1]))
        accepted: List[int] = []
        for value, t in candidates:
            if any(abs(t - kept) < min_gap for kept in accepted):
                continue
            accepted.append(t)
            onsets[t, k] = 0.5 + 0.5 * value
    notes = activations_to_notes(onsets, frames, 0.5, config.frame_period)
    return onsets, frames, notes
