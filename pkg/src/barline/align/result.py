"""Alignment outcome container and its JSON wire form."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple


@dataclass(frozen=True)
class AlignmentResult:
    """Decoded path plus note correspondences.

    path holds the top-layer score index per step (per frame for audio,
    per performed note for symbolic); -1 marks silence or extra-note
    states.  Every performance index lands in exactly one of matched or
    extra, every score index in exactly one of matched or missing.
    Audio-route matches carry no performance index (None).
    """

    path: Tuple[int, ...]
    matched: Tuple[Tuple[Optional[int], int], ...]
    missing: Tuple[int, ...]
    extra: Tuple[int, ...]
    onsets_sec: Mapping[int, float]
    log_prob: float

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(self.path))
        object.__setattr__(self, "matched", tuple(
            (p, s) for p, s in self.matched))
        object.__setattr__(self, "missing", tuple(self.missing))
        object.__setattr__(self, "extra", tuple(self.extra))
        object.__setattr__(self, "onsets_sec", dict(self.onsets_sec))
        matched_scores = {s for _, s in self.matched}
        if matched_scores & set(self.missing):
            raise ValueError("score index in both matched and missing")
        matched_perf = [p for p, _ in self.matched if p is not None]
        if set(matched_perf) & set(self.extra):
            raise ValueError("performance index in both matched and extra")


def result_to_json(result: AlignmentResult) -> Dict:
    """External JSON shape; onset keys become strings per JSON rules."""
    return {
        "path": list(result.path),
        "matched": [[p, s] for p, s in result.matched],
        "missing": list(result.missing),
        "extra": list(result.extra),
        "onsets_sec": {str(k): v for k, v in sorted(result.onsets_sec.items())},
        "log_prob": result.log_prob,
    }


def result_from_json(document: Mapping) -> AlignmentResult:
    return AlignmentResult(
        path=tuple(document["path"]),
        matched=tuple((p, s) for p, s in document["matched"]),
        missing=tuple(document["missing"]),
        extra=tuple(document["extra"]),
        onsets_sec={int(k): float(v)
                    for k, v in document["onsets_sec"].items()},
        log_prob=float(document["log_prob"]),
    )
