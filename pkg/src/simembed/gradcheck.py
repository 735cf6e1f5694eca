"""Finite-difference verification of the analytic gradients."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import pairwise_sq_distances
from .projections import (
    KernelSpec,
    embedded_similarity,
    grad_kernel,
    grad_linear,
    grad_ortho_kernel,
    grad_ortho_linear,
    kernel_matrix,
    ortho_penalty_kernel,
    ortho_penalty_linear,
    sef_loss,
)

FD_STEP = 1e-5
GRADIENTS = ("similarity_linear", "similarity_kernel", "ortho_linear", "ortho_kernel")


def central_difference(f, x, h: float = FD_STEP) -> np.ndarray:
    x = np.array(x, dtype=np.float64)
    g = np.empty_like(x)
    for idx in np.ndindex(x.shape):
        orig = x[idx]
        x[idx] = orig + h
        f_plus = f(x)
        x[idx] = orig - h
        f_minus = f(x)
        x[idx] = orig
        g[idx] = (f_plus - f_minus) / (2.0 * h)
    return g


def relative_error(analytic, numeric) -> float:
    """Max-norm error scaled by the larger max-norm of the two gradients."""
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    scale = max(np.abs(analytic).max(), np.abs(numeric).max(), 1e-12)
    return float(np.abs(analytic - numeric).max() / scale)


def random_problem(rng, n, d, m):
    """Standardised data, a random symmetric target in [0, 1] and a random positive mask."""
    X = rng.normal(size=(n, d))
    X = (X - X.mean(0)) / np.maximum(X.std(0), 1e-12)
    T = rng.uniform(size=(n, n))
    T = 0.5 * (T + T.T)
    np.fill_diagonal(T, 1.0)
    M = rng.uniform(0.1, 1.0, size=(n, n))
    M = 0.5 * (M + M.T)
    return X, T, M


def _median_bandwidth(D) -> float:
    off = D[np.triu_indices(D.shape[0], k=1)]
    return float(np.median(off)) if off.size and np.median(off) > 0 else 1.0


def check_instance(rng, n, d, m, h: float = FD_STEP) -> dict[str, float]:
    X, T, M = random_problem(rng, n, d, m)

    W = rng.normal(scale=1.0 / np.sqrt(d), size=(d, m))
    sigma = _median_bandwidth(pairwise_sq_distances(X @ W))

    def js_linear(Wv):
        return sef_loss(embedded_similarity(X @ Wv, sigma), T, M)

    Y = X @ W
    g_lin = grad_linear(X, Y, embedded_similarity(Y, sigma), T, M, sigma)

    K = kernel_matrix(X, X, KernelSpec("rbf", gamma=np.sqrt(_median_bandwidth(pairwise_sq_distances(X)))))
    A = rng.normal(scale=1.0 / np.sqrt(n), size=(n, m))
    sigma_k = _median_bandwidth(pairwise_sq_distances(K @ A))

    def js_kernel(Av):
        return sef_loss(embedded_similarity(K @ Av, sigma_k), T, M)

    YK = K @ A
    g_ker = grad_kernel(K, YK, embedded_similarity(YK, sigma_k), T, M, sigma_k)

    return {
        "similarity_linear": relative_error(g_lin, central_difference(js_linear, W, h)),
        "similarity_kernel": relative_error(g_ker, central_difference(js_kernel, A, h)),
        "ortho_linear": relative_error(grad_ortho_linear(W), central_difference(ortho_penalty_linear, W, h)),
        "ortho_kernel": relative_error(
            grad_ortho_kernel(A, K), central_difference(lambda Av: ortho_penalty_kernel(Av, K), A, h)
        ),
    }


@dataclass
class GradcheckReport:
    tolerance: float
    shapes: list[tuple[int, int, int]] = field(default_factory=list)
    max_error: dict[str, float] = field(default_factory=lambda: dict.fromkeys(GRADIENTS, 0.0))

    @property
    def passed(self) -> dict[str, bool]:
        return {k: v < self.tolerance for k, v in self.max_error.items()}

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def lines(self) -> list[str]:
        out = ["shapes (N, d, m): " + " ".join(f"({n},{d},{m})" for n, d, m in self.shapes)]
        for k, v in self.max_error.items():
            out.append(f"{k:<18} max_rel_err={v:.3e}  {'PASS' if v < self.tolerance else 'FAIL'}")
        return out


def run_gradcheck(seed: int = 42, sizes=(10, 6, 3), n_instances: int = 20, tol: float = 1e-4) -> GradcheckReport:
    """Check every gradient on ``n_instances`` random problems with N, d, m drawn up to ``sizes``."""
    max_n, max_d, max_m = sizes
    rng = np.random.default_rng(seed)
    report = GradcheckReport(tolerance=tol)
    for _ in range(n_instances):
        n = int(rng.integers(3, max_n + 1)) if max_n > 3 else max_n
        d = int(rng.integers(1, max_d + 1))
        m = int(rng.integers(1, max_m + 1))
        report.shapes.append((n, d, m))
        for k, v in check_instance(rng, n, d, m).items():
            report.max_error[k] = max(report.max_error[k], v)
    return report
