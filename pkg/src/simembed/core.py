"""Pairwise geometry, heat-kernel similarity, bandwidth search and preprocessing."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidData, InvalidParameter

STD_EPS = 1e-12
N_BINS = 100


def default_sigma_grid() -> np.ndarray:
    """41 log-spaced bandwidths from 1e-5 to 1e5 (four per decade)."""
    return np.logspace(-5, 5, 41)


def as_data_matrix(X, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InvalidData(f"{name} must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidData(f"{name} contains NaN or Inf")
    return X


def pairwise_sq_distances(Y, Z=None) -> np.ndarray:
    """Squared Euclidean distances between the rows of ``Y`` (and ``Z`` if given).

    The Gram-matrix expansion is used, so tiny negative values from
    cancellation are clipped to zero and the self-distance diagonal is
    forced to exactly zero.
    """
    Y = as_data_matrix(Y, "Y")
    same = Z is None
    Z = Y if same else as_data_matrix(Z, "Z")
    if Y.shape[1] != Z.shape[1]:
        raise DimensionMismatch(f"feature dims differ: {Y.shape[1]} vs {Z.shape[1]}")
    sq_y = np.einsum("ij,ij->i", Y, Y)
    sq_z = sq_y if same else np.einsum("ij,ij->i", Z, Z)
    G = Y @ Z.T
    G *= 2.0
    # (sq_i + sq_j) - 2 G_ij is exactly symmetric whenever G is
    D = sq_y[:, None] + sq_z[None, :]
    D -= G
    np.maximum(D, 0.0, out=D)
    if same:
        if not np.array_equal(D, D.T):
            D = 0.5 * (D + D.T)
        np.fill_diagonal(D, 0.0)
    return D


def gaussian_similarity(D, sigma: float) -> np.ndarray:
    """Heat kernel ``exp(-D / sigma)`` applied element-wise to squared distances."""
    if not np.isfinite(sigma) or sigma <= 0:
        raise InvalidParameter(f"sigma must be positive, got {sigma}")
    S = np.multiply(D, -1.0 / sigma, dtype=np.float64)
    return np.exp(S, out=S)


def histogram_peak(S) -> int:
    """Largest bin count of the 100-bin histogram over [0, 1] of the off-diagonal entries.

    Only the strict upper triangle is counted; for symmetric inputs this
    halves every bin, which leaves the ranking between bandwidths unchanged.
    """
    S = np.asarray(S)
    iu = np.triu_indices(S.shape[0], k=1)
    counts, _ = np.histogram(S[iu], bins=N_BINS, range=(0.0, 1.0))
    return int(counts.max())


def estimate_scaling_factor(D, grid: Sequence[float] | None = None) -> float:
    """Pick the bandwidth that spreads the similarity values the most.

    Every candidate in ``grid`` is scored by the peak bin count of the
    similarity histogram; the lowest peak wins, ties go to the smaller
    bandwidth.
    """
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] < 2:
        raise InvalidData("need a square distance matrix with at least 2 rows")
    grid = default_sigma_grid() if grid is None else np.asarray(grid, dtype=np.float64).ravel()
    if grid.size == 0:
        raise InvalidParameter("sigma grid is empty")
    if np.any(~np.isfinite(grid)) or np.any(grid <= 0):
        raise InvalidParameter("sigma grid values must be positive and finite")

    iu = np.triu_indices(D.shape[0], k=1)
    d = D[iu]
    best_sigma, best_peak = None, None
    for sigma in np.sort(grid):
        counts, _ = np.histogram(np.exp(-d / sigma), bins=N_BINS, range=(0.0, 1.0))
        peak = counts.max()
        if best_peak is None or peak < best_peak:
            best_sigma, best_peak = float(sigma), peak
    return best_sigma


@dataclass(frozen=True)
class PreprocessStats:
    mode: Literal["z-normalize", "center-only"]
    mean: np.ndarray
    std: np.ndarray

    @property
    def n_features(self) -> int:
        return self.mean.shape[0]


def preprocess_fit(X, mode: str = "z-normalize") -> PreprocessStats:
    X = as_data_matrix(X)
    mean = X.mean(axis=0)
    # exact mean for constant columns, otherwise rounding / STD_EPS explodes
    constant = np.ptp(X, axis=0) == 0
    mean[constant] = X[0, constant]
    if mode == "z-normalize":
        std = np.maximum(X.std(axis=0), STD_EPS)
    elif mode == "center-only":
        std = np.ones(X.shape[1])
    else:
        raise InvalidParameter(f"unknown preprocessing mode {mode!r}")
    return PreprocessStats(mode=mode, mean=mean, std=std)


def preprocess_apply(X, stats: PreprocessStats) -> np.ndarray:
    X = as_data_matrix(X)
    if X.shape[1] != stats.n_features:
        raise DimensionMismatch(
            f"data has {X.shape[1]} features, preprocessing expects {stats.n_features}"
        )
    return (X - stats.mean) / stats.std
