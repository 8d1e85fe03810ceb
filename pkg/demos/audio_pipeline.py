"""
From samples to score positions
===============================

Synthesize a sine rendition of a short melody, inspect its constant-Q
spectrogram, transcribe it back to notes, and finally align the raw
audio frames to the score with the HMM route.
"""

import numpy as np

from barline.abcio import parse_abc
from barline.audio import (CqtConfig, baseline_transcribe, bin_frequencies,
                           compute_cqt, render_reference)
from barline.events import score_to_reference
from barline.pipeline import audio_alignment

# the frame route folds immediately repeated pitches, so the tune
# changes pitch on every note
TUNE = """X:1
T:Sine Study
M:4/4
L:1/8
K:C
CDEF GABc | dcBA GFED |]
"""

score = parse_abc(TUNE)
reference = score_to_reference(score, tempo_bpm=110.0)
audio = render_reference(reference, tempo_bpm=110.0)
print(f"rendered {audio.duration_sec:.2f} s at {audio.sample_rate} Hz")

# the CQT lays out 88 log-spaced bins, one per piano key
config = CqtConfig()
magnitudes = np.asarray(compute_cqt(audio, config))
freqs = bin_frequencies(config)
peak = magnitudes[len(magnitudes) // 2].argmax()
print(f"{magnitudes.shape[0]} frames x {magnitudes.shape[1]} bins; "
      f"mid-file peak at bin {peak} ({freqs[peak]:.1f} Hz)")

# transcription recovers the note list from the activations
onsets, frames, notes = baseline_transcribe(audio)
print("transcribed pitches:", [n.pitch for n in notes])
print("expected pitches:   ",
      [next(iter(e.pitches)) for e in reference])

# the frame-level route aligns audio to the score without note events
result = audio_alignment(score, audio, tempo_bpm=110.0)
print(f"audio route matched {len(result.matched)} of {len(reference)}")
for s in sorted(result.onsets_sec):
    nominal = float(reference[s].onset_beats) * 60.0 / 110.0
    drift = (result.onsets_sec[s] - nominal) * 1000.0
    print(f"  event {s:2d}: aligned {result.onsets_sec[s]:6.3f} s "
          f"({drift:+5.1f} ms from nominal)")
