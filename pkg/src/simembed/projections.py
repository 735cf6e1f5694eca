"""Linear and kernel projections, the similarity-matching objective and its gradients.

Shapes used throughout: ``X`` is N x d (preprocessed samples), ``K`` is the
N x N training kernel matrix, ``W`` is d x m, ``A`` is N x m and ``Y`` is the
N x m embedding.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import PreprocessStats, as_data_matrix, gaussian_similarity, pairwise_sq_distances
from .errors import DimensionMismatch, InvalidMask, InvalidParameter


@dataclass(frozen=True)
class KernelSpec:
    kind: Literal["rbf", "linear", "poly"] = "rbf"
    gamma: float = 1.0
    degree: int = 3
    coef0: float = 1.0

    def __post_init__(self):
        if self.kind not in ("rbf", "linear", "poly"):
            raise InvalidParameter(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and not (np.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidParameter(f"RBF gamma must be positive, got {self.gamma}")
        if self.kind == "poly" and self.degree < 1:
            raise InvalidParameter(f"polynomial degree must be >= 1, got {self.degree}")


@dataclass(frozen=True)
class LinearModel:
    W: np.ndarray
    stats: PreprocessStats
    sigma_p: float | None = None

    @property
    def n_components(self) -> int:
        return self.W.shape[1]


@dataclass(frozen=True)
class KernelModel:
    A: np.ndarray
    kernel: KernelSpec
    X_train: np.ndarray
    stats: PreprocessStats
    sigma_p: float | None = None

    def __post_init__(self):
        if self.A.shape[0] != self.X_train.shape[0]:
            raise DimensionMismatch(
                f"A has {self.A.shape[0]} rows but {self.X_train.shape[0]} training samples are stored"
            )

    @property
    def n_components(self) -> int:
        return self.A.shape[1]


def linear_project(W, X) -> np.ndarray:
    X = as_data_matrix(X)
    W = np.asarray(W, dtype=np.float64)
    if X.shape[1] != W.shape[0]:
        raise DimensionMismatch(f"data has {X.shape[1]} features, W expects {W.shape[0]}")
    return X @ W


def kernel_matrix(Xa, Xb, spec: KernelSpec) -> np.ndarray:
    """Kernel values between the rows of ``Xa`` and ``Xb``.

    The RBF kernel is ``exp(-|a - b|^2 / gamma^2)``; note the squared
    bandwidth, unlike the heat kernel used for embedded similarities.
    """
    Xa = as_data_matrix(Xa, "Xa")
    Xb = as_data_matrix(Xb, "Xb")
    if Xa.shape[1] != Xb.shape[1]:
        raise DimensionMismatch(f"feature dims differ: {Xa.shape[1]} vs {Xb.shape[1]}")
    if spec.kind == "linear":
        return Xa @ Xb.T
    if spec.kind == "poly":
        return (Xa @ Xb.T + spec.coef0) ** spec.degree
    D = pairwise_sq_distances(Xa) if Xa is Xb else pairwise_sq_distances(Xa, Xb)
    return np.exp(-D / spec.gamma**2)


def kernel_project(A, K_new) -> np.ndarray:
    """Embed samples given their kernel values against the training set (rows of ``K_new``)."""
    A = np.asarray(A, dtype=np.float64)
    K_new = np.atleast_2d(np.asarray(K_new, dtype=np.float64))
    if K_new.shape[1] != A.shape[0]:
        raise DimensionMismatch(f"kernel has {K_new.shape[1]} columns, A has {A.shape[0]} rows")
    return K_new @ A


def embedded_similarity(Y, sigma_p: float) -> np.ndarray:
    return gaussian_similarity(pairwise_sq_distances(Y), sigma_p)


def mask_norm(M) -> float:
    norm = float(np.abs(M).sum())
    if not norm > 0:
        raise InvalidMask("mask has zero 1-norm")
    return norm


def _check_shapes(P, T, M):
    P, T, M = (np.asarray(a, dtype=np.float64) for a in (P, T, M))
    if not (P.shape == T.shape == M.shape):
        raise DimensionMismatch(f"shapes differ: P {P.shape}, T {T.shape}, M {M.shape}")
    return P, T, M


def sef_loss(P, T, M) -> float:
    """Mask-weighted squared mismatch between achieved and target similarities."""
    P, T, M = _check_shapes(P, T, M)
    return float((M * (P - T) ** 2).sum() / (2.0 * mask_norm(M)))


def ortho_penalty_linear(W) -> float:
    W = np.asarray(W, dtype=np.float64)
    m = W.shape[1]
    return float(np.sum((W.T @ W - np.eye(m)) ** 2) / (2.0 * m * m))


def ortho_penalty_kernel(A, K) -> float:
    A = np.asarray(A, dtype=np.float64)
    K = np.asarray(K, dtype=np.float64)
    if K.shape != (A.shape[0], A.shape[0]):
        raise DimensionMismatch(f"K has shape {K.shape}, A has {A.shape[0]} rows")
    m = A.shape[1]
    return float(np.sum((A.T @ K @ A - np.eye(m)) ** 2) / (2.0 * m * m))


def _similarity_terms(Y, P, T, M, sigma_p, norm=None) -> tuple[float, np.ndarray]:
    """Loss value and the N x m factor ``B`` such that the gradient is ``X.T @ B`` (or ``K.T @ B``).

    With ``C_ij = M_ij (P_ij - T_ij) P_ij`` the double sum over pairs
    collapses to ``B = -2 / (sigma |M|) * ((C 1 + C^T 1) * Y - C Y - C^T Y)``.
    """
    if not (np.isfinite(sigma_p) and sigma_p > 0):
        raise InvalidParameter(f"sigma_p must be positive, got {sigma_p}")
    if norm is None:
        norm = mask_norm(M)
    R = P - T
    C = M * R
    loss = float(np.vdot(C, R)) / (2.0 * norm)
    C *= P
    degree = C.sum(axis=1) + C.sum(axis=0)
    B = degree[:, None] * Y
    B -= C @ Y
    B -= C.T @ Y
    B *= -2.0 / (sigma_p * norm)
    return loss, B


def grad_linear(X, Y, P, T, M, sigma_p) -> np.ndarray:
    """Gradient of the similarity loss with respect to the linear weights ``W``."""
    P, T, M = _check_shapes(P, T, M)
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    return X.T @ _similarity_terms(Y, P, T, M, sigma_p)[1]


def grad_kernel(K, Y, P, T, M, sigma_p) -> np.ndarray:
    """Gradient of the similarity loss with respect to the kernel coefficients ``A``."""
    P, T, M = _check_shapes(P, T, M)
    K = np.asarray(K, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    return K.T @ _similarity_terms(Y, P, T, M, sigma_p)[1]


def grad_ortho_linear(W) -> np.ndarray:
    W = np.asarray(W, dtype=np.float64)
    m = W.shape[1]
    return (2.0 / m**2) * W @ (W.T @ W - np.eye(m))


def grad_ortho_kernel(A, K) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    K = np.asarray(K, dtype=np.float64)
    if K.shape != (A.shape[0], A.shape[0]):
        raise DimensionMismatch(f"K has shape {K.shape}, A has {A.shape[0]} rows")
    m = A.shape[1]
    KA = K @ A
    return (2.0 / m**2) * KA @ (A.T @ KA - np.eye(m))


def total_objective_and_grad(
    params,
    data,
    T,
    M,
    sigma_p: float,
    alpha_p: float,
    mode: Literal["linear", "kernel"] = "linear",
    norm: float | None = None,
) -> tuple[float, np.ndarray]:
    """Weighted objective ``(2 - alpha_p) * J_s + alpha_p * J_p`` and its gradient.

    ``params`` is ``W`` with ``data = X`` in linear mode, or ``A`` with
    ``data = K`` in kernel mode. ``norm`` may carry a precomputed ``|M|_1``.
    """
    if not 0.0 <= alpha_p <= 1.0:
        raise InvalidParameter(f"alpha_p must lie in [0, 1], got {alpha_p}")
    params = np.asarray(params, dtype=np.float64)
    data = np.asarray(data, dtype=np.float64)
    if mode == "linear":
        Y = linear_project(params, data)
    elif mode == "kernel":
        Y = kernel_project(params, data)
    else:
        raise InvalidParameter(f"unknown mode {mode!r}")
    P = embedded_similarity(Y, sigma_p)
    if P.shape != np.shape(T) or P.shape != np.shape(M):
        raise DimensionMismatch(f"embedding of {P.shape[0]} samples vs target {np.shape(T)}")
    j_s, B = _similarity_terms(Y, P, T, M, sigma_p, norm)
    g_s = data.T @ B
    if mode == "linear":
        j_p, g_p = ortho_penalty_linear(params), grad_ortho_linear(params)
    else:
        j_p, g_p = ortho_penalty_kernel(params, data), grad_ortho_kernel(params, data)
    return (2.0 - alpha_p) * j_s + alpha_p * j_p, (2.0 - alpha_p) * g_s + alpha_p * g_p
