"""Diagonal-covariance Gaussian mixtures for observation scoring."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.special import logsumexp

from ..errors import DegenerateData, DimensionMismatch

VARIANCE_FLOOR = 1e-6
_MAX_ITERATIONS = 100
_RELATIVE_TOL = 1e-6


@dataclass(frozen=True)
class GmmParams:
    """Mixture weights plus per-component mean and diagonal variance."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        m = np.asarray(self.means, dtype=np.float64)
        v = np.asarray(self.variances, dtype=np.float64)
        if w.ndim != 1 or m.ndim != 2 or v.shape != m.shape:
            raise DimensionMismatch(
                f"weights {w.shape}, means {m.shape}, variances {v.shape}")
        if len(w) != len(m):
            raise DimensionMismatch(
                f"{len(w)} weights for {len(m)} components")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {w.sum()}, expected 1")
        if (v < VARIANCE_FLOOR - 1e-15).any():
            raise ValueError("variance below floor")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "variances", v)

    @property
    def components(self) -> int:
        return len(self.weights)

    @property
    def dims(self) -> int:
        return self.means.shape[1]


def _component_log_densities(params: GmmParams, x: np.ndarray) -> np.ndarray:
    """Per-component log N(x; mu_k, diag sigma2_k) for a batch of rows."""
    # (T, K, D) broadcast; constant term folded per component
    diff = x[:, None, :] - params.means[None, :, :]
    quad = (diff * diff / params.variances[None, :, :]).sum(axis=2)
    log_norm = (np.log(2.0 * np.pi * params.variances)).sum(axis=1)
    return -0.5 * (quad + log_norm[None, :])


def gmm_log_densities(params: GmmParams, x: np.ndarray) -> np.ndarray:
    """Log mixture density for each row of a T x D matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.dims:
        raise DimensionMismatch(
            f"observations {x.shape} vs model dim {params.dims}")
    log_comp = _component_log_densities(params, x)
    return logsumexp(log_comp + np.log(params.weights)[None, :], axis=1)


def gmm_log_density(params: GmmParams, x: np.ndarray) -> float:
    """Log mixture density of a single observation vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != params.dims:
        raise DimensionMismatch(f"vector {x.shape} vs model dim {params.dims}")
    return float(gmm_log_densities(params, x[None, :])[0])


def _kmeans_pp(frames: np.ndarray, k: int,
               rng: np.random.Generator) -> np.ndarray:
    centers = [frames[rng.integers(len(frames))]]
    for _ in range(1, k):
        d2 = np.min(
            [((frames - c) ** 2).sum(axis=1) for c in centers], axis=0)
        total = d2.sum()
        if total <= 0:
            centers.append(frames[rng.integers(len(frames))])
            continue
        centers.append(frames[rng.choice(len(frames), p=d2 / total)])
    return np.array(centers)


def fit_gmm(frames: np.ndarray, k: int = 8, seed: int = 0,
            history: Optional[List[float]] = None) -> GmmParams:
    """Fit a K-component diagonal GMM by EM from a k-means++ start.

    Stops after 100 iterations or when the relative log-likelihood
    change drops below 1e-6; variances are floored at 1e-6 every M-step.
    Identical frames collapse to a warned single-component fallback.
    history, when given, receives the per-iteration log-likelihood.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2:
        raise DimensionMismatch(f"expected T x D frames, got {frames.shape}")
    t, dims = frames.shape
    if t < k:
        raise DimensionMismatch(f"{t} frames cannot seed {k} components")

    if np.ptp(frames, axis=0).max(initial=0.0) == 0.0:
        warnings.warn("all frames identical", DegenerateData)
        return GmmParams(
            weights=np.ones(1),
            means=frames[:1].copy(),
            variances=np.full((1, dims), VARIANCE_FLOOR))

    rng = np.random.default_rng(seed)
    means = _kmeans_pp(frames, k, rng)
    variances = np.maximum(frames.var(axis=0), VARIANCE_FLOOR)
    variances = np.tile(variances, (k, 1))
    weights = np.full(k, 1.0 / k)

    previous = -np.inf
    for _ in range(_MAX_ITERATIONS):
        params = GmmParams(weights=weights, means=means, variances=variances)
        log_joint = (_component_log_densities(params, frames)
                     + np.log(weights)[None, :])
        log_norm = logsumexp(log_joint, axis=1)
        likelihood = float(log_norm.sum())
        if history is not None:
            history.append(likelihood)
        resp = np.exp(log_joint - log_norm[:, None])

        mass = resp.sum(axis=0)
        empty = mass < 1e-12
        if empty.any():
            # reseed dead components on the worst-explained frames
            order = np.argsort(log_norm)
            for slot, frame_idx in zip(np.flatnonzero(empty), order):
                means[slot] = frames[frame_idx]
                mass[slot] = 1.0
                resp[frame_idx] = 0.0
                resp[frame_idx, slot] = 1.0
            mass = resp.sum(axis=0)
        weights = mass / mass.sum()
        means = (resp.T @ frames) / mass[:, None]
        second = (resp.T @ (frames * frames)) / mass[:, None]
        variances = np.maximum(second - means * means, VARIANCE_FLOOR)

        if abs(likelihood - previous) < _RELATIVE_TOL * max(
                1.0, abs(previous)):
            break
        previous = likelihood
    return GmmParams(weights=weights, means=means, variances=variances)
