"""Fitting a similarity embedding and applying it to new data."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .core import (
    as_data_matrix,
    default_sigma_grid,
    estimate_scaling_factor,
    pairwise_sq_distances,
    preprocess_apply,
    preprocess_fit,
)
from .errors import DimensionMismatch, InvalidParameter
from .optimizer import AdamState, adam_step
from .projections import (
    KernelModel,
    KernelSpec,
    LinearModel,
    embedded_similarity,
    kernel_matrix,
    kernel_project,
    linear_project,
    mask_norm,
    sef_loss,
    total_objective_and_grad,
)
from .reference import kpca_fit, pca_fit
from .targets import TargetPair

log = logging.getLogger(__name__)

DEFAULT_ITERS = {"linear": 500, "kernel": 1000}
DEFAULT_LR = {"linear": 1e-3, "kernel": 1e-5}


@dataclass
class TrainConfig:
    """Hyper-parameters of :func:`fit`.

    ``n_iters`` and ``lr`` default per mode (500 / 1e-3 linear, 1000 / 1e-5
    kernel). In kernel mode with ``gamma_auto`` set, the RBF bandwidth is
    picked on the training data by the same histogram-spread search used for
    ``sigma_p``; a missing ``kernel`` means an automatic RBF kernel.
    """

    m: int = 2
    mode: Literal["linear", "kernel"] = "linear"
    n_iters: int | None = None
    lr: float | None = None
    alpha_p: float = 1.0
    sigma_grid: tuple[float, ...] = field(default_factory=lambda: tuple(default_sigma_grid()))
    seed: int = 42
    init: Literal["pca", "random"] = "pca"
    kernel: KernelSpec | None = None
    gamma_auto: bool = False
    record_loss: bool = False

    def resolved(self) -> "TrainConfig":
        if self.mode not in DEFAULT_ITERS:
            raise InvalidParameter(f"unknown mode {self.mode!r}")
        cfg = TrainConfig(**{k: getattr(self, k) for k in self.__dataclass_fields__})
        if cfg.n_iters is None:
            cfg.n_iters = DEFAULT_ITERS[cfg.mode]
        if cfg.lr is None:
            cfg.lr = DEFAULT_LR[cfg.mode]
        if cfg.mode == "kernel" and cfg.kernel is None:
            cfg.kernel = KernelSpec("rbf")
            cfg.gamma_auto = True
        if cfg.n_iters < 1:
            raise InvalidParameter(f"n_iters must be >= 1, got {cfg.n_iters}")
        if not cfg.lr > 0:
            raise InvalidParameter(f"lr must be positive, got {cfg.lr}")
        if not 0.0 <= cfg.alpha_p <= 1.0:
            raise InvalidParameter(f"alpha_p must lie in [0, 1], got {cfg.alpha_p}")
        if cfg.m < 1:
            raise InvalidParameter(f"m must be >= 1, got {cfg.m}")
        if cfg.init not in ("pca", "random"):
            raise InvalidParameter(f"unknown init {cfg.init!r}")
        if len(cfg.sigma_grid) == 0:
            raise InvalidParameter("sigma grid is empty")
        return cfg


@dataclass
class FitReport:
    initial_loss: float
    final_loss: float
    initial_similarity_loss: float
    final_similarity_loss: float
    sigma_p: float
    n_iters: int
    loss_trace: list[float] | None = None
    gamma: float | None = None

    @property
    def diverged(self) -> bool:
        return not self.final_loss < self.initial_loss


def _auto_gamma(X, grid) -> float:
    # the RBF kernel is exp(-D / gamma^2): spread its values like any other similarity
    return float(np.sqrt(estimate_scaling_factor(pairwise_sq_distances(X), grid)))


def fit(X, target: TargetPair, config: TrainConfig | None = None):
    """Learn a projection whose embedded similarities match ``target``.

    Returns ``(model, report)``; the model is a :class:`LinearModel` or a
    :class:`KernelModel` depending on ``config.mode``.
    """
    cfg = (config or TrainConfig()).resolved()
    X = as_data_matrix(X)
    n, d = X.shape
    if target.n_samples != n:
        raise DimensionMismatch(f"target is {target.n_samples} x {target.n_samples} but X has {n} rows")
    if n < 2:
        raise InvalidParameter("need at least 2 samples")
    T, M = target.T, target.M
    grid = np.asarray(cfg.sigma_grid, dtype=np.float64)
    rng = np.random.default_rng(cfg.seed)

    gamma = None
    if cfg.mode == "linear":
        stats = preprocess_fit(X, "z-normalize")
        data = preprocess_apply(X, stats)
        if cfg.m > d:
            raise InvalidParameter(f"m = {cfg.m} exceeds the input dimensionality {d}")
        if cfg.init == "pca":
            params = pca_fit(data, cfg.m)
        else:
            params = rng.normal(scale=1.0 / np.sqrt(d), size=(d, cfg.m))
        project = linear_project
    else:
        stats = preprocess_fit(X, "center-only")
        Xc = preprocess_apply(X, stats)
        spec = cfg.kernel
        if cfg.gamma_auto and spec.kind == "rbf":
            gamma = _auto_gamma(Xc, grid)
            spec = KernelSpec("rbf", gamma=gamma)
        data = kernel_matrix(Xc, Xc, spec)
        if cfg.m > n:
            raise InvalidParameter(f"m = {cfg.m} exceeds the number of training samples {n}")
        if cfg.init == "pca":
            params = kpca_fit(data, cfg.m)
        else:
            params = rng.normal(scale=1.0 / n, size=(n, cfg.m))
        project = kernel_project

    sigma_p = estimate_scaling_factor(pairwise_sq_distances(project(params, data)), grid)
    log.debug("sigma_p = %g", sigma_p)

    norm = mask_norm(M)
    state = AdamState(params.shape)
    trace = [] if cfg.record_loss else None
    loss0 = sim0 = None
    for _ in range(cfg.n_iters):
        loss, grad = total_objective_and_grad(params, data, T, M, sigma_p, cfg.alpha_p, cfg.mode, norm)
        if loss0 is None:
            loss0 = loss
            sim0 = sef_loss(embedded_similarity(project(params, data), sigma_p), T, M)
        if trace is not None:
            trace.append(loss)
        params = adam_step(params, grad, state, cfg.lr)

    final_loss, _ = total_objective_and_grad(params, data, T, M, sigma_p, cfg.alpha_p, cfg.mode, norm)
    final_sim = sef_loss(embedded_similarity(project(params, data), sigma_p), T, M)
    if trace is not None:
        trace.append(final_loss)
    if not np.all(np.isfinite(params)) or not np.isfinite(final_loss):
        raise FloatingPointError("optimisation produced non-finite parameters")

    if cfg.mode == "linear":
        model = LinearModel(W=params, stats=stats, sigma_p=sigma_p)
    else:
        model = KernelModel(A=params, kernel=spec, X_train=Xc, stats=stats, sigma_p=sigma_p)
    report = FitReport(
        initial_loss=loss0,
        final_loss=final_loss,
        initial_similarity_loss=sim0,
        final_similarity_loss=final_sim,
        sigma_p=sigma_p,
        n_iters=cfg.n_iters,
        loss_trace=trace,
        gamma=gamma,
    )
    if report.diverged:
        warnings.warn(
            f"objective did not decrease ({loss0:.6g} -> {final_loss:.6g})", RuntimeWarning, stacklevel=2
        )
    return model, report


def transform(model: LinearModel | KernelModel, X) -> np.ndarray:
    """Project new samples with a fitted model (stored preprocessing is applied first)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        # a single sample, not a single feature
        X = X.reshape(1, -1)
    X = preprocess_apply(X, model.stats)
    if isinstance(model, LinearModel):
        return linear_project(model.W, X)
    return kernel_project(model.A, kernel_matrix(X, model.X_train, model.kernel))
