"""Event-clocked alignment of performed notes against reference events."""

from __future__ import annotations

from math import ceil, log
from typing import Dict, List, Tuple

import numpy as np

from ..events import PerformanceNotes, ReferenceEvents
from .result import AlignmentResult
from .transitions import TransitionParams, initial_distribution, \
    transition_matrix
from .viterbi import viterbi

EPS_MISMATCH = 1e-3
EPS_EXTRA = 1e-2
# insertion channel: one parallel extra-note state per score position,
# entered with _P_INSERT and resuming through that position's row
_P_INSERT = 0.02
_P_INSERT_SELF = 0.2


def extract_correspondences(path: Tuple[int, ...],
                            performance: PerformanceNotes,
                            reference: ReferenceEvents) -> Dict:
    """Partition notes and events given a decoded per-note path.

    path[p] is the score index claimed by performed note p, or -1 for an
    extra-note step.  When adjacent events share a pitch the decoder
    ties on emissions and parks the boundary note by transition
    arithmetic alone, so duplicate claims of a pitch first drift to a
    neighboring event that wants the pitch and has no claim on it
    (earliest copy backward, latest copy forward).  A score event then
    counts as matched when at least half of its pitches (rounded up)
    arrive with the right pitch; each pitch slot consumes the earliest
    claiming note, remaining duplicates and wrong-pitch claims fall to
    extra.
    """
    assigned: Dict[int, List[int]] = {}
    extra: List[int] = []
    for p, state in enumerate(path):
        if 0 <= state < len(reference):
            assigned.setdefault(state, []).append(p)
        else:
            extra.append(p)

    def lacks(t: int, pitch: int) -> bool:
        return (0 <= t < len(reference)
                and pitch in reference[t].pitches
                and all(performance[q].pitch != pitch
                        for q in assigned.get(t, ())))

    for s in range(len(reference)):
        by_pitch: Dict[int, List[int]] = {}
        for p in sorted(assigned.get(s, ())):
            by_pitch.setdefault(performance[p].pitch, []).append(p)
        for pitch, group in by_pitch.items():
            if len(group) < 2 or pitch not in reference[s].pitches:
                continue
            if lacks(s - 1, pitch):
                mover = group.pop(0)
                assigned[s].remove(mover)
                assigned.setdefault(s - 1, []).append(mover)
            if len(group) >= 2 and lacks(s + 1, pitch):
                mover = group.pop()
                assigned[s].remove(mover)
                assigned.setdefault(s + 1, []).append(mover)

    matched: List[Tuple[int, int]] = []
    missing: List[int] = []
    onsets: Dict[int, float] = {}
    for s, event in enumerate(reference):
        claims = sorted(assigned.get(s, ()))
        first_by_pitch: Dict[int, int] = {}
        leftovers: List[int] = []
        for p in claims:
            pitch = performance[p].pitch
            if pitch in event.pitches and pitch not in first_by_pitch:
                first_by_pitch[pitch] = p
            else:
                leftovers.append(p)
        if len(first_by_pitch) >= ceil(len(event.pitches) / 2):
            pairs = sorted(first_by_pitch.values())
            matched.extend((p, s) for p in pairs)
            onsets[s] = min(performance[p].onset_sec for p in pairs)
            extra.extend(leftovers)
        else:
            missing.append(s)
            extra.extend(claims)

    return {
        "matched": tuple(matched),
        "missing": tuple(missing),
        "extra": tuple(sorted(extra)),
        "onsets_sec": onsets,
    }


def align_symbolic(performance: PerformanceNotes,
                   reference: ReferenceEvents,
                   params: TransitionParams = TransitionParams(),
                   eps_mismatch: float = EPS_MISMATCH,
                   eps_extra: float = EPS_EXTRA) -> AlignmentResult:
    """Align a note list to reference events by event-clocked Viterbi.

    Each performed note emits log(1 - eps_mismatch) at score events
    containing its pitch, log(eps_mismatch) elsewhere, and
    log(eps_extra) in the insertion channel.  Self-loops absorb chord
    members, forward skips absorb deletions, insertion states absorb
    spurious notes.  A k-pitch event emits k observations in sequence,
    so its state carries self-loop mass (k - 1)/k, the note-clocked
    analogue of the audio route's duration-tied dwell; the move
    distribution keeps the configured off-diagonal proportions.
    """
    if not performance:
        raise ValueError("empty performance")
    if not reference:
        raise ValueError("empty reference")

    n = len(reference)
    top = transition_matrix(n, params)
    init_top = initial_distribution(n, params)
    for i, event in enumerate(reference):
        size = len(event.pitches)
        if size <= 1 or n == 1:
            continue
        stay = (size - 1.0) / size
        moves = top[i].copy()
        moves[i] = 0.0
        top[i] = moves * ((1.0 - stay) / moves.sum())
        top[i, i] = stay
    n_states = 2 * n + 1  # events, then extra states for positions -1..n-1

    trans = np.zeros((n_states, n_states))
    for i in range(n):
        trans[i, :n] = (1.0 - _P_INSERT) * top[i]
        trans[i, n + 1 + i] = _P_INSERT
    for k in range(-1, n):
        state = n + 1 + k
        resume = init_top if k < 0 else top[k]
        trans[state, :n] = (1.0 - _P_INSERT_SELF) * resume
        trans[state, state] = _P_INSERT_SELF

    init = np.zeros(n_states)
    init[:n] = (1.0 - _P_INSERT) * init_top
    init[n] = _P_INSERT

    log_match = log(1.0 - eps_mismatch)
    log_miss = log(eps_mismatch)
    log_obs = np.full((len(performance), n_states), log(eps_extra))
    for p, note in enumerate(performance):
        for s, event in enumerate(reference):
            log_obs[p, s] = log_match if note.pitch in event.pitches \
                else log_miss

    with np.errstate(divide="ignore"):
        state_path, log_prob = viterbi(
            log_obs, np.log(init), np.log(trans))

    top_path = tuple(s if s < n else -1 for s in state_path)
    parts = extract_correspondences(top_path, performance, reference)
    return AlignmentResult(path=top_path, log_prob=log_prob, **parts)
