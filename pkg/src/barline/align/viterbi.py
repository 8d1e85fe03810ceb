"""Exact max-product decoding in log space."""

from __future__ import annotations

from typing import Tuple

import numpy as np

from ..errors import DimensionMismatch, NoFeasiblePath


def viterbi(log_obs: np.ndarray, log_init: np.ndarray,
            log_trans: np.ndarray) -> Tuple[Tuple[int, ...], float]:
    """Most probable state path for a T x S observation score matrix.

    Ties break toward the smaller state index, both at each backtrack
    step and at the final state, so decoding is deterministic.
    """
    log_obs = np.asarray(log_obs, dtype=np.float64)
    log_init = np.asarray(log_init, dtype=np.float64)
    log_trans = np.asarray(log_trans, dtype=np.float64)
    if log_obs.ndim != 2:
        raise DimensionMismatch(f"observations {log_obs.shape}")
    n_frames, n_states = log_obs.shape
    if log_init.shape != (n_states,) or log_trans.shape != (n_states,
                                                            n_states):
        raise DimensionMismatch(
            f"init {log_init.shape}, transitions {log_trans.shape} "
            f"for {n_states} states")
    if n_frames == 0:
        raise NoFeasiblePath("no observations")

    delta = log_init + log_obs[0]
    backptr = np.zeros((n_frames, n_states), dtype=np.intp)
    for t in range(1, n_frames):
        scores = delta[:, None] + log_trans
        best = np.argmax(scores, axis=0)  # first max = smallest index
        backptr[t] = best
        delta = scores[best, np.arange(n_states)] + log_obs[t]

    final = int(np.argmax(delta))
    total = float(delta[final])
    if not np.isfinite(total):
        raise NoFeasiblePath("all paths have zero probability")

    path = np.empty(n_frames, dtype=np.intp)
    path[-1] = final
    for t in range(n_frames - 1, 0, -1):
        path[t - 1] = backptr[t, path[t]]
    return tuple(int(s) for s in path), total
