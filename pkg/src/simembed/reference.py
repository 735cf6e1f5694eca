"""Small reference methods: eigensolver, PCA, uncentered KPCA, ISOMAP, one-vs-one linear SVM, NCC."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .core import as_data_matrix, pairwise_sq_distances
from .errors import (
    DegenerateKernel,
    DimensionMismatch,
    DisconnectedGraph,
    InvalidData,
    InvalidLabels,
    InvalidParameter,
)

KPCA_EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eigh(S) -> EigenDecomposition:
    """Eigen-decomposition of a symmetric matrix, eigenvalues in descending order.

    Each eigenvector is flipped so that its largest-magnitude entry is
    positive, which makes the output reproducible across LAPACK builds.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidData(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise InvalidData("matrix contains NaN or Inf")
    vals, vecs = np.linalg.eigh(0.5 * (S + S.T))
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return EigenDecomposition(vals, vecs * signs)


def pca_fit(X, m: int) -> np.ndarray:
    """Top-``m`` principal directions as the columns of a d x m matrix."""
    X = as_data_matrix(X)
    d = X.shape[1]
    if not 1 <= m <= d:
        raise InvalidParameter(f"m must be in [1, {d}], got {m}")
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / max(X.shape[0] - 1, 1)
    return sym_eigh(cov).eigenvectors[:, :m].copy()


def kpca_fit(K, m: int) -> np.ndarray:
    """Top-``m`` eigenvectors of an (uncentered) kernel matrix, scaled so that ``a.T K a == 1``."""
    K = np.asarray(K, dtype=np.float64)
    n = K.shape[0]
    if not 1 <= m <= n:
        raise InvalidParameter(f"m must be in [1, {n}], got {m}")
    eig = sym_eigh(K)
    vals = eig.eigenvalues[:m]
    if np.any(vals <= KPCA_EIG_FLOOR):
        bad = int(np.argmax(vals <= KPCA_EIG_FLOOR))
        raise DegenerateKernel(
            f"eigenvalue #{bad} of the kernel matrix is {vals[bad]:.3g}; "
            f"cannot normalise {m} projection directions"
        )
    A = eig.eigenvectors[:, :m] / np.sqrt(vals)
    # renormalise so a.T K a == 1 holds to rounding rather than to eigh accuracy
    A /= np.sqrt(np.einsum("ik,ij,jk->k", A, K, A))
    return A


def knn_indices(D, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest neighbours of every row, self excluded, ties by index."""
    D = np.array(D, dtype=np.float64)
    n = D.shape[0]
    if not 1 <= k < n:
        raise InvalidParameter(f"k must be in [1, {n - 1}], got {k}")
    np.fill_diagonal(D, np.inf)
    return np.argsort(D, axis=1, kind="stable")[:, :k]


def knn_graph(D, k: int) -> np.ndarray:
    """Symmetrised (OR) boolean k-NN adjacency, without self loops."""
    idx = knn_indices(D, k)
    n = idx.shape[0]
    adj = np.zeros((n, n), dtype=bool)
    adj[np.repeat(np.arange(n), k), idx.ravel()] = True
    return adj | adj.T


def geodesic_distances(X, k: int) -> np.ndarray:
    X = as_data_matrix(X)
    D = pairwise_sq_distances(X)
    adj = knn_graph(D, k)
    weights = np.where(adj, np.sqrt(D), 0.0)
    G = shortest_path(csr_matrix(weights), method="D", directed=False)
    if not np.all(np.isfinite(G)):
        raise DisconnectedGraph(f"the {k}-NN graph is not connected; increase k")
    return G


def classical_mds(G, m: int) -> np.ndarray:
    G = np.asarray(G, dtype=np.float64)
    n = G.shape[0]
    if not 1 <= m <= n:
        raise InvalidParameter(f"m must be in [1, {n}], got {m}")
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (G**2) @ J
    eig = sym_eigh(B)
    vals = np.clip(eig.eigenvalues[:m], 0.0, None)
    return eig.eigenvectors[:, :m] * np.sqrt(vals)


def isomap(X, k: int, m: int) -> np.ndarray:
    """ISOMAP embedding: classical MDS on k-NN graph geodesics."""
    return classical_mds(geodesic_distances(X, k), m)


def encode_labels(labels) -> np.ndarray:
    """Validate labels as dense integer ids 0..C-1."""
    y = np.asarray(labels)
    if y.ndim != 1:
        raise InvalidLabels("labels must be a 1-D vector")
    if y.size == 0:
        raise InvalidLabels("labels are empty")
    if not np.issubdtype(y.dtype, np.integer):
        if np.issubdtype(y.dtype, np.floating) and np.all(y == np.round(y)):
            y = y.astype(np.int64)
        else:
            raise InvalidLabels("labels must be integer class ids")
    if y.min() < 0:
        raise InvalidLabels("labels must be non-negative")
    present = np.unique(y)
    if present.size != y.max() + 1:
        missing = sorted(set(range(int(y.max()) + 1)) - set(present.tolist()))
        raise InvalidLabels(f"classes {missing} have no samples")
    return y.astype(np.int64)


@dataclass
class LinearSVM:
    pos_class: int
    neg_class: int
    w: np.ndarray
    b: float

    def decision(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return X @ self.w + self.b


@dataclass
class OvoSvmSet:
    n_classes: int
    models: dict[tuple[int, int], LinearSVM] = field(default_factory=dict)

    def decisions(self, X) -> dict[tuple[int, int], np.ndarray]:
        return {pair: model.decision(X) for pair, model in self.models.items()}

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for (a, b), model in self.models.items():
            winner = np.where(model.decision(X) >= 0, a, b)
            votes[rows, winner] += 1
        return np.argmax(votes, axis=1)


def _train_binary_svm(X, y_pm, C, epochs, rng) -> tuple[np.ndarray, float]:
    # Pegasos-style subgradient descent on lambda/2 |w|^2 + mean hinge, step 1/(lambda t).
    # The bias is learned as the weight of a constant feature.
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])
    lam = 1.0 / (C * n)
    w = np.zeros(d + 1)
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            active = y_pm[i] * (Xa[i] @ w) < 1.0
            w *= 1.0 - eta * lam
            if active:
                w += eta * y_pm[i] * Xa[i]
    return w[:d], float(w[d])


def svm_ovo_fit(X, labels, C: float = 1.0, epochs: int = 200, seed: int = 42) -> OvoSvmSet:
    """One-vs-one linear hinge-loss SVMs, one per unordered class pair.

    For pair ``(a, b)`` with ``a < b`` class ``a`` is the positive side.
    """
    X = as_data_matrix(X)
    y = encode_labels(labels)
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"{y.shape[0]} labels for {X.shape[0]} samples")
    n_classes = int(y.max()) + 1
    if n_classes < 2:
        raise InvalidLabels("at least two classes are required")
    if C <= 0:
        raise InvalidParameter(f"C must be positive, got {C}")
    if epochs < 1:
        raise InvalidParameter(f"epochs must be >= 1, got {epochs}")
    rng = np.random.default_rng(seed)
    ovo = OvoSvmSet(n_classes=n_classes)
    for a, b in combinations(range(n_classes), 2):
        mask = (y == a) | (y == b)
        y_pm = np.where(y[mask] == a, 1.0, -1.0)
        w, bias = _train_binary_svm(X[mask], y_pm, C, epochs, rng)
        ovo.models[(a, b)] = LinearSVM(a, b, w, float(bias))
    return ovo


def svm_decision(model: LinearSVM, x) -> np.ndarray | float:
    out = model.decision(x)
    return float(out[0]) if np.ndim(x) == 1 else out


def ncc_fit(X, labels) -> np.ndarray:
    """Class centroids, one row per class id."""
    X = as_data_matrix(X)
    y = encode_labels(labels)
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"{y.shape[0]} labels for {X.shape[0]} samples")
    n_classes = int(y.max()) + 1
    return np.stack([X[y == c].mean(axis=0) for c in range(n_classes)])


def ncc_predict(centroids, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    centroids = np.asarray(centroids, dtype=np.float64)
    if X.shape[1] != centroids.shape[1]:
        raise DimensionMismatch(f"{X.shape[1]} features, centroids have {centroids.shape[1]}")
    # direct differences keep exact ties exact; argmin then picks the lowest class id
    dist = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(dist, axis=1)
