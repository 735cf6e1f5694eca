"""Acceptance criteria, one test each.

Every test records a ``C<n> ... PASS|FAIL`` line (printed in the terminal
summary) before asserting, so a failing criterion still reports its numbers.
"""
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from simembed.cli import main
from simembed.core import default_sigma_grid, estimate_scaling_factor, pairwise_sq_distances, preprocess_apply, preprocess_fit
from simembed.gradcheck import random_problem, run_gradcheck
from simembed.io import write_dataset
from simembed.projections import (
    KernelSpec,
    embedded_similarity,
    grad_kernel,
    grad_linear,
    kernel_matrix,
    kernel_project,
    linear_project,
    ortho_penalty_linear,
)
from simembed.reference import isomap, kpca_fit, ncc_fit, ncc_predict, pca_fit, svm_ovo_fit
from simembed.targets import target_clone, target_lda, target_svm
from simembed.trainer import TrainConfig, fit, transform
from test_core import exhaustive_sigma
from toydata import digits_split, gaussian_blobs, nuisance_blobs, swiss_roll


def record(tag, ok, detail):
    line = f"{tag}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def ncc_accuracy(Y_train, y_train, Y_test, y_test):
    return float(np.mean(ncc_predict(ncc_fit(Y_train, y_train), Y_test) == y_test))


def test_c1_gradient_correctness():
    start = time.perf_counter()
    report = run_gradcheck(seed=42, sizes=(10, 6, 3), n_instances=20, tol=1e-4)
    elapsed = time.perf_counter() - start
    worst = max(report.max_error.values())
    ok = report.ok and elapsed < 10.0
    assert record("C1 gradient correctness", ok, f"max rel err {worst:.2e} < 1e-4 over 20 instances, {elapsed:.2f}s < 10s")


def test_c2_linear_kernel_consistency():
    rng = np.random.default_rng(2)
    proj_err = grad_err = 0.0
    for _ in range(10):
        n, d, m = rng.integers(4, 11), rng.integers(2, 7), rng.integers(1, 4)
        X, T, M = random_problem(rng, n, d, m)
        A = rng.normal(scale=0.3, size=(n, m))
        K = kernel_matrix(X, X, KernelSpec("linear"))
        Y = kernel_project(A, K)
        proj_err = max(proj_err, np.abs(Y - linear_project(X.T @ A, X)).max())
        sigma = float(np.median(pairwise_sq_distances(Y)))
        P = embedded_similarity(Y, sigma)
        grad_err = max(grad_err, np.abs(grad_kernel(K, Y, P, T, M, sigma) - X @ grad_linear(X, Y, P, T, M, sigma)).max())
    ok = proj_err < 1e-10 and grad_err < 1e-8
    assert record("C2 linear/kernel consistency", ok, f"projection {proj_err:.1e} < 1e-10, gradient {grad_err:.1e} < 1e-8")


def test_c3_sigma_search_oracle():
    rng = np.random.default_rng(3)
    grid = default_sigma_grid()
    matches = 0
    for _ in range(10):
        n, d = rng.integers(5, 30), rng.integers(1, 6)
        D = pairwise_sq_distances(rng.normal(scale=rng.uniform(0.1, 10), size=(n, d)))
        matches += estimate_scaling_factor(D, grid) == exhaustive_sigma(D, grid)
    assert record("C3 sigma search oracle", matches == 10, f"{matches}/10 exact matches")


def test_c4_initialization_invariants():
    datasets = [gaussian_blobs(0)[0], swiss_roll(0), digits_split(0)[0][:300]]
    worst_ortho = worst_norm = 0.0
    for X in datasets:
        Z = preprocess_apply(X, preprocess_fit(X, "z-normalize"))
        worst_ortho = max(worst_ortho, ortho_penalty_linear(pca_fit(Z, 2)))
        Xc = preprocess_apply(X, preprocess_fit(X, "center-only"))
        gamma = float(np.sqrt(np.median(pairwise_sq_distances(Xc))))
        K = kernel_matrix(Xc, Xc, KernelSpec("rbf", gamma=gamma))
        A = kpca_fit(K, 2)
        worst_norm = max(worst_norm, np.abs(np.einsum("ik,ij,jk->k", A, K, A) - 1).max())
    ok = worst_ortho < 1e-10 and worst_norm <= 1e-8
    assert record("C4 initialization invariants", ok, f"PCA ortho penalty {worst_ortho:.1e} < 1e-10, |aKa - 1| {worst_norm:.1e} <= 1e-8")


def test_c5_training_descent():
    wins = 0
    for seed in range(10):
        X, y = gaussian_blobs(seed, n=300, d=20, n_classes=3)
        _, report = fit(X, target_lda(y), TrainConfig(m=2, mode="linear", n_iters=500, lr=1e-3))
        wins += report.final_loss < report.initial_loss
    assert record("C5 training descent", wins == 10, f"final < initial on {wins}/10 seeds")


def test_c6_clone_pca_beats_pca():
    start = time.perf_counter()
    cs, base = [], []
    for seed in range(5):
        X, y, Xt, yt = digits_split(seed, n_train=1000)
        stats = preprocess_fit(X)
        Z, Zt = preprocess_apply(X, stats), preprocess_apply(Xt, stats)
        W10 = pca_fit(Z, 10)
        base.append(ncc_accuracy(Z @ W10, y, Zt @ W10, yt))
        model, _ = fit(X, target_clone(Z @ pca_fit(Z, 50)), TrainConfig(m=10))
        cs.append(ncc_accuracy(transform(model, X), y, transform(model, Xt), yt))
    elapsed = time.perf_counter() - start
    each = all(c >= b - 0.005 for c, b in zip(cs, base))
    median = np.median(cs) > np.median(base)
    detail = (f"cS-PCA {np.round(cs, 4).tolist()} vs PCA {np.round(base, 4).tolist()}, "
              f"median {np.median(cs):.4f} > {np.median(base):.4f}, {elapsed:.0f}s < 120s")
    assert record("C6 cS-PCA(10) vs PCA(10)", each and median and elapsed < 120, detail)


def test_c7_slda_beyond_class_cap():
    # gated on the digit fixture (resample 0); resamples 1 and 2 are reported for context only
    rows = []
    for seed in range(3):
        X, y, Xt, yt = digits_split(seed, n_train=1000)
        target = target_lda(y)
        acc = {}
        for m in (9, 18):
            model, report = fit(X, target, TrainConfig(m=m))
            assert np.isfinite(report.final_loss)
            acc[m] = ncc_accuracy(transform(model, X), y, transform(model, Xt), yt)
        rows.append((acc[9], acc[18]))
    a9, a18 = rows[0]
    extra = ", ".join(f"{b:.4f} vs {a:.4f}" for a, b in rows[1:])
    detail = f"m=18 {a18:.4f} >= m=9 {a9:.4f} - 0.01; other resamples (info): {extra}"
    assert record("C7 S-LDA 2(C-1) dims", a18 >= a9 - 0.01, detail)


def test_c8_clone_fidelity():
    wins, ratios = 0, []
    for seed in range(10):
        X = swiss_roll(seed, n=300)
        target = target_clone(isomap(X, 10, 2))
        model, report = fit(X, target, TrainConfig(mode="kernel", m=2, n_iters=1000, lr=1e-5, alpha_p=0.001))
        # rebuild the initial projection the same way fit does
        K = kernel_matrix(model.X_train, model.X_train, model.kernel)
        P0 = embedded_similarity(K @ kpca_fit(K, 2), report.sigma_p)
        P1 = embedded_similarity(K @ model.A, report.sigma_p)
        before, after = np.linalg.norm(P0 - target.T), np.linalg.norm(P1 - target.T)
        wins += after < before
        ratios.append(after / before)
    assert record("C8 clone fidelity", wins == 10, f"{wins}/10 runs reduce |P - T|_F, worst ratio {max(ratios):.3f}")


def test_c9_ssvm_beats_raw():
    wins, rows = 0, []
    for seed in range(10):
        X, y, Xt, yt = nuisance_blobs(seed)
        raw = ncc_accuracy(X, y, Xt, yt)
        Z = preprocess_apply(X, preprocess_fit(X))
        target = target_svm(svm_ovo_fit(Z, y).decisions(Z), y)
        model, _ = fit(X, target, TrainConfig(m=3, alpha_p=0.001))
        emb = ncc_accuracy(transform(model, X), y, transform(model, Xt), yt)
        wins += emb >= raw
        rows.append(f"{emb:.3f}/{raw:.3f}")
    assert record("C9 S-SVM-A vs raw NCC", wins >= 9, f"{wins}/10 resamples (embedded/raw: {' '.join(rows)})")


def test_c10_determinism(tmp_path):
    X, y = gaussian_blobs(10, n=80, d=6)
    write_dataset(tmp_path / "d.csv", X, y)
    assert main(["make-target", "--data", str(tmp_path / "d.csv"), "--kind", "lda", "--out", str(tmp_path / "t")]) == 0
    for name in ("a", "b"):
        code = main(["fit", "--data", str(tmp_path / "d.csv"), "--target", str(tmp_path / "t"), "--out", str(tmp_path / name)])
        assert code == 0
    same = (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
    assert record("C10 determinism", same, "byte-identical model files" if same else "model files differ")
