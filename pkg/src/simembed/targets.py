"""Target similarity / mask constructions.

Each constructor returns a :class:`TargetPair`. ``T`` and ``M`` are dense
N x N arrays; ``meta`` records the parameters actually used (including any
bandwidth picked automatically) so it can be written next to the matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core import as_data_matrix, estimate_scaling_factor, gaussian_similarity, pairwise_sq_distances
from .errors import DimensionMismatch, InvalidLabels, InvalidParameter, MissingModel
from .reference import encode_labels, knn_graph

AUTO = "auto"


@dataclass
class TargetPair:
    T: np.ndarray
    M: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.T.shape != self.M.shape or self.T.ndim != 2 or self.T.shape[0] != self.T.shape[1]:
            raise DimensionMismatch(f"T {self.T.shape} and M {self.M.shape} must be equal square shapes")

    @property
    def n_samples(self) -> int:
        return self.T.shape[0]


def _resolve_sigma(D, sigma, grid):
    if sigma is None or (isinstance(sigma, str) and sigma.lower() == AUTO):
        return estimate_scaling_factor(D, grid)
    sigma = float(sigma)
    if not (np.isfinite(sigma) and sigma > 0):
        raise InvalidParameter(f"bandwidth must be positive, got {sigma}")
    return sigma


def _labels_with_classes(labels, minimum=2):
    y = encode_labels(labels)
    n_classes = int(y.max()) + 1
    if n_classes < minimum:
        raise InvalidLabels(f"need at least {minimum} classes, got {n_classes}")
    return y, n_classes


def target_pca(n: int) -> TargetPair:
    if n < 2:
        raise InvalidParameter(f"need at least 2 samples, got {n}")
    return TargetPair(np.zeros((n, n)), np.ones((n, n)), {"kind": "pca"})


def target_lda(labels) -> TargetPair:
    y, n_classes = _labels_with_classes(labels)
    same = y[:, None] == y[None, :]
    T = same.astype(np.float64)
    M = np.where(same, 1.0, 1.0 / (n_classes - 1))
    return TargetPair(T, M, {"kind": "lda", "n_classes": n_classes})


def target_le(X, k: int, sigma_le="auto", grid=None) -> TargetPair:
    """Neighbours get similarity 1, everyone else keeps the heat-kernel similarity of the input."""
    X = as_data_matrix(X)
    D = pairwise_sq_distances(X)
    neighbours = knn_graph(D, k)
    sigma = _resolve_sigma(D, sigma_le, grid)
    T = gaussian_similarity(D, sigma)
    T[neighbours] = 1.0
    np.fill_diagonal(T, 1.0)
    return TargetPair(T, np.ones_like(T), {"kind": "le", "k": k, "sigma": sigma})


def target_lap_pca(X, k: int, nonneighbor_weight: float = 1.0) -> TargetPair:
    """Neighbours get similarity 1, non-neighbours 0; the mask weight of non-neighbour pairs is configurable."""
    if not 0.0 <= nonneighbor_weight <= 1.0:
        raise InvalidParameter(f"nonneighbor_weight must lie in [0, 1], got {nonneighbor_weight}")
    X = as_data_matrix(X)
    neighbours = knn_graph(pairwise_sq_distances(X), k)
    np.fill_diagonal(neighbours, True)
    T = neighbours.astype(np.float64)
    M = np.where(neighbours, 1.0, nonneighbor_weight)
    if not M.sum() > 0:
        raise InvalidParameter("mask would be all zeros")
    return TargetPair(T, M, {"kind": "lap-pca", "k": k, "nonneighbor_weight": nonneighbor_weight})


def target_clone(G, sigma_copy="auto", grid=None) -> TargetPair:
    """Similarities of an existing embedding ``G`` (N x p), to be copied by the learned projection."""
    G = as_data_matrix(G, "G")
    if G.shape[0] < 2:
        raise InvalidParameter("need at least 2 samples")
    D = pairwise_sq_distances(G)
    sigma = _resolve_sigma(D, sigma_copy, grid)
    T = gaussian_similarity(D, sigma)
    return TargetPair(T, np.ones_like(T), {"kind": "clone", "sigma": sigma})


SAME_CLASS_RULES = ("min", "zero")


def svm_distance_matrix(decisions: Mapping[tuple[int, int], np.ndarray], labels, same_class: str = "min") -> np.ndarray:
    """Pairwise distances induced by one-vs-one decision values.

    Cross-class pairs use the model that separates their two classes.
    Same-class pairs of class ``c`` take the smallest distance over all
    models that involve ``c`` (``same_class="min"``), or 0 (``"zero"``).
    """
    if same_class not in SAME_CLASS_RULES:
        raise InvalidParameter(f"same_class must be one of {SAME_CLASS_RULES}, got {same_class!r}")
    y, n_classes = _labels_with_classes(labels)
    n = y.shape[0]
    vals = {}
    for a in range(n_classes):
        for b in range(a + 1, n_classes):
            key = (a, b) if (a, b) in decisions else (b, a)
            if key not in decisions:
                raise MissingModel(f"no decision values for class pair {(a, b)}")
            v = np.asarray(decisions[key], dtype=np.float64).ravel()
            if v.shape[0] != n:
                raise DimensionMismatch(f"pair {key}: {v.shape[0]} decision values for {n} samples")
            vals[(a, b)] = v

    D = np.empty((n, n))
    same_dist = np.full((n, n), np.inf)
    for (a, b), v in vals.items():
        diff = np.abs(v[:, None] - v[None, :])
        cross = np.outer(y == a, y == b)
        cross |= cross.T
        D[cross] = diff[cross]
        for c in (a, b):
            block = np.outer(y == c, y == c)
            same_dist[block] = np.minimum(same_dist[block], diff[block])
    same = y[:, None] == y[None, :]
    D[same] = same_dist[same] if same_class == "min" else 0.0
    np.fill_diagonal(D, 0.0)
    return D


def target_svm(
    decisions: Mapping[tuple[int, int], np.ndarray], labels, sigma_svm="auto", grid=None, same_class: str = "min"
) -> TargetPair:
    D = svm_distance_matrix(decisions, labels, same_class)
    sigma = _resolve_sigma(D, sigma_svm, grid)
    T = gaussian_similarity(D, sigma)
    np.fill_diagonal(T, 1.0)
    meta = {"kind": "svm", "sigma": sigma, "n_classes": int(np.max(labels)) + 1, "same_class": same_class}
    return TargetPair(T, np.ones_like(T), meta)
