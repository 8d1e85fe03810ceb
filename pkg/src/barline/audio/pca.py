"""PCA reduction of feature frames."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from ..errors import DimensionMismatch, RankDeficient


@dataclass(frozen=True)
class PcaModel:
    """Mean vector plus component rows in descending eigenvalue order."""

    mean: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray

    @property
    def dims(self) -> int:
        return self.components.shape[0]


def _stack(features: Union[np.ndarray, Sequence[np.ndarray]]) -> np.ndarray:
    if isinstance(features, np.ndarray):
        return np.atleast_2d(np.asarray(features, dtype=np.float64))
    return np.vstack([np.atleast_2d(np.asarray(f, dtype=np.float64))
                      for f in features])


def pca_fit(features: Union[np.ndarray, Sequence[np.ndarray]],
            dims: int = 30) -> PcaModel:
    """Fit top-`dims` principal components of the pooled frames.

    Components whose eigenvalues vanish are replaced by zero rows with a
    RankDeficient warning, keeping the output shape stable.
    """
    data = _stack(features)
    n, d = data.shape
    if n < dims:
        raise DimensionMismatch(f"{n} frames cannot support {dims} components")
    mean = data.mean(axis=0)
    centered = data - mean
    cov = centered.T @ centered / max(n - 1, 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    cutoff = max(eigvals[0], 0.0) * 1e-12
    rank = int(np.sum(eigvals > cutoff))
    take = min(dims, d)
    components = np.zeros((dims, d))
    kept = min(take, rank) if rank > 0 else 0
    components[:kept] = eigvecs[:, :kept].T
    if kept < dims:
        warnings.warn(
            f"only {kept} nonzero eigenvalues for {dims} requested "
            "components; padding with zeros", RankDeficient, stacklevel=2)

    for r in range(kept):
        row = components[r]
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            components[r] = -row
    out_eigvals = np.zeros(dims)
    out_eigvals[:kept] = np.maximum(eigvals[:kept], 0.0)
    return PcaModel(mean=mean, components=components, eigenvalues=out_eigvals)


def pca_transform(model: PcaModel, features: np.ndarray) -> np.ndarray:
    """Project frames onto the fitted components."""
    data = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if data.shape[1] != model.mean.shape[0]:
        raise DimensionMismatch(
            f"frames have {data.shape[1]} dims, model expects "
            f"{model.mean.shape[0]}")
    return (data - model.mean) @ model.components.T
