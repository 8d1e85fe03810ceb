"""Structured transition model over score event indices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TransitionParams:
    """Mass allocation per move class, geometric within a class.

    Values encode a mostly-forward reading: sequential progression
    dominates, sustained positions and jumps keep small positive mass so
    no plausible path is unreachable.
    """

    forward: float = 0.85
    self_loop: float = 0.05
    skip: float = 0.07
    skip_ratio: float = 0.5
    backward: float = 0.03
    backward_ratio: float = 0.5


def _geometric(mass: float, count: int, ratio: float) -> np.ndarray:
    weights = ratio ** np.arange(count)
    return mass * weights / weights.sum()


def transition_matrix(n_states: int,
                      params: TransitionParams = TransitionParams()
                      ) -> np.ndarray:
    """Row-stochastic event transition matrix.

    Row i holds self-loop, forward step to i+1, forward skips to i+d
    (d >= 2) and backward jumps to i-d (d >= 1), each class decaying
    geometrically with distance; rows renormalize where the sequence
    boundary truncates a class.
    """
    if n_states < 1:
        raise ValueError(f"need at least one state, got {n_states}")
    matrix = np.zeros((n_states, n_states))
    for i in range(n_states):
        row = matrix[i]
        row[i] = params.self_loop
        if i + 1 < n_states:
            row[i + 1] = params.forward
        n_skip = n_states - i - 2
        if n_skip > 0 and params.skip > 0:
            row[i + 2:] = _geometric(params.skip, n_skip, params.skip_ratio)
        if i > 0 and params.backward > 0:
            row[i - 1::-1] = _geometric(
                params.backward, i, params.backward_ratio)
        row /= row.sum()
    return matrix


def initial_distribution(n_states: int,
                         params: TransitionParams = TransitionParams()
                         ) -> np.ndarray:
    """Entry distribution: the forward/skip classes of a virtual
    pre-start position, so openings skipped by the performer stay
    reachable."""
    if n_states < 1:
        raise ValueError(f"need at least one state, got {n_states}")
    init = np.zeros(n_states)
    init[0] = params.forward
    if n_states > 1 and params.skip > 0:
        init[1:] = _geometric(params.skip, n_states - 1, params.skip_ratio)
    return init / init.sum()
