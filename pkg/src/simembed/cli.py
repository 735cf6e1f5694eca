"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import sys
import time
import warnings

import numpy as np

from . import __version__
from .core import preprocess_apply, preprocess_fit
from .errors import (
    DegenerateKernel,
    DimensionMismatch,
    DisconnectedGraph,
    EmptyDataset,
    FileFormatError,
    InvalidData,
    InvalidLabels,
    InvalidMask,
    InvalidParameter,
    MissingModel,
)
from .gradcheck import run_gradcheck
from .io import load_model, load_target, read_dataset, save_model, save_target, write_embedding
from .projections import KernelSpec
from .reference import isomap, ncc_fit, ncc_predict, pca_fit, svm_ovo_fit
from .targets import target_clone, target_lap_pca, target_lda, target_le, target_pca, target_svm
from .trainer import TrainConfig, fit, transform

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

TARGET_KINDS = ("pca", "lda", "le", "lap-pca", "clone", "svm")


class UsageError(Exception):
    pass


def _sigma_arg(value: str):
    if value.lower() == "auto":
        return "auto"
    try:
        sigma = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number or 'auto', got {value!r}") from None
    if not sigma > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return sigma


def _sizes_arg(value: str):
    try:
        sizes = tuple(int(v) for v in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N,d,m integers, got {value!r}") from None
    if len(sizes) != 3 or min(sizes) < 1 or sizes[0] < 2:
        raise argparse.ArgumentTypeError(f"expected N,d,m with N >= 2, got {value!r}")
    return sizes


def _require_labels(ds, path):
    if ds.labels is None:
        raise UsageError(f"{path} has no 'label' column, which this command requires")
    return ds.labels


def cmd_make_target(args) -> int:
    ds = read_dataset(args.data)
    X = ds.features
    if args.kind in ("le", "lap-pca") and args.k is None:
        raise UsageError(f"--k is required for --kind {args.kind}")
    if args.kind == "pca":
        target = target_pca(ds.n_samples)
    elif args.kind == "lda":
        target = target_lda(_require_labels(ds, args.data))
    elif args.kind == "le":
        target = target_le(X, args.k, args.sigma)
    elif args.kind == "lap-pca":
        target = target_lap_pca(X, args.k, args.nonneighbor_weight)
    elif args.kind == "clone":
        if args.embedding is None:
            raise UsageError("--embedding is required for --kind clone")
        G = read_dataset(args.embedding).features
        if G.shape[0] != ds.n_samples:
            raise DimensionMismatch(f"embedding has {G.shape[0]} rows, dataset has {ds.n_samples}")
        target = target_clone(G, args.sigma)
    else:
        y = _require_labels(ds, args.data)
        Z = preprocess_apply(X, preprocess_fit(X))
        ovo = svm_ovo_fit(Z, y, C=args.svm_c, epochs=args.svm_epochs, seed=args.seed)
        target = target_svm(ovo.decisions(Z), y, args.sigma, same_class=args.svm_same_class)
        target.meta.update(svm_c=args.svm_c, svm_epochs=args.svm_epochs, seed=args.seed)
    save_target(args.out, target)
    sigma = target.meta.get("sigma")
    print(f"wrote {args.kind} target ({ds.n_samples}x{ds.n_samples}) to {args.out}"
          + (f", sigma={sigma:.6g}" if sigma is not None else ""))
    return EXIT_OK


def cmd_embed(args) -> int:
    ds = read_dataset(args.data)
    Z = preprocess_apply(ds.features, preprocess_fit(ds.features))
    if args.method == "pca":
        Y = Z @ pca_fit(Z, args.dims)
    else:
        Y = isomap(Z, args.k, args.dims)
    write_embedding(args.out, Y, ds.labels if args.keep_labels else None)
    print(f"wrote {args.method} embedding ({Y.shape[0]}x{Y.shape[1]}) to {args.out}")
    return EXIT_OK


def _train_config(args) -> TrainConfig:
    kernel, gamma_auto = None, False
    if args.mode == "kernel":
        if args.kernel == "rbf":
            gamma_auto = args.gamma == "auto"
            kernel = KernelSpec("rbf", gamma=1.0 if gamma_auto else args.gamma)
        elif args.kernel == "poly":
            kernel = KernelSpec("poly", degree=args.degree, coef0=args.coef0)
        else:
            kernel = KernelSpec("linear")
    return TrainConfig(
        m=args.dims,
        mode=args.mode,
        n_iters=args.iters,
        lr=args.lr,
        alpha_p=args.alpha_p,
        seed=args.seed,
        init=args.init,
        kernel=kernel,
        gamma_auto=gamma_auto,
    )


def cmd_fit(args) -> int:
    ds = read_dataset(args.data)
    target = load_target(args.target)
    if target.n_samples != ds.n_samples:
        raise DimensionMismatch(f"target is for {target.n_samples} samples, dataset has {ds.n_samples}")
    cfg = _train_config(args).resolved()

    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        model, report = fit(ds.features, target, cfg)
    elapsed = time.perf_counter() - start

    echo = {
        "m": cfg.m,
        "mode": cfg.mode,
        "n_iters": cfg.n_iters,
        "lr": cfg.lr,
        "alpha_p": cfg.alpha_p,
        "seed": cfg.seed,
        "init": cfg.init,
        "target": target.meta,
        "initial_loss": report.initial_loss,
        "final_loss": report.final_loss,
    }
    save_model(args.out, model, echo)
    print(f"initial_loss={report.initial_loss:.6g}")
    print(f"final_loss={report.final_loss:.6g}")
    print(f"sigma_p={report.sigma_p:.6g}")
    if report.gamma is not None:
        print(f"gamma={report.gamma:.6g}")
    print(f"wall_time={elapsed:.3f}s")
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return EXIT_OK


def cmd_transform(args) -> int:
    model = load_model(args.model)
    ds = read_dataset(args.data)
    Y = transform(model, ds.features)
    labels = None
    if ds.labels is not None:
        labels = [ds.label_names[i] for i in ds.labels]
    write_embedding(args.out, Y, labels)
    print(f"wrote {Y.shape[0]}x{Y.shape[1]} embedding to {args.out}")
    return EXIT_OK


def _aligned_labels(train, test):
    # map test label strings onto the train ids; unseen test classes get fresh ids
    names = list(train.label_names)
    index = {name: i for i, name in enumerate(names)}
    test_y = np.array([index.setdefault(test.label_names[i], len(index)) for i in test.labels])
    return train.labels, test_y


def cmd_eval(args) -> int:
    model = load_model(args.model)
    train, test = read_dataset(args.train), read_dataset(args.test)
    _require_labels(train, args.train)
    _require_labels(test, args.test)
    y_train, y_test = _aligned_labels(train, test)

    centroids = ncc_fit(transform(model, train.features), y_train)
    start = time.perf_counter()
    pred = ncc_predict(centroids, transform(model, test.features))
    per_sample = (time.perf_counter() - start) / test.n_samples
    accuracy = float(np.mean(pred == y_test))
    print(f"classifier={args.classifier}")
    print(f"accuracy={accuracy:.4f}")
    print(f"mean_time_per_sample={per_sample * 1e6:.2f}us")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    report = run_gradcheck(seed=args.seed, sizes=args.sizes, n_instances=args.instances, tol=args.tol)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simembed", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("make-target", help="build a target similarity/mask file")
    t.add_argument("--data", required=True, help="dataset CSV")
    t.add_argument("--kind", required=True, choices=TARGET_KINDS)
    t.add_argument("--out", required=True)
    t.add_argument("--k", type=int, help="neighbours for le / lap-pca")
    t.add_argument("--sigma", type=_sigma_arg, default="auto", help="bandwidth for le/clone/svm, or 'auto'")
    t.add_argument("--embedding", help="embedding CSV to clone (rows aligned with --data)")
    t.add_argument("--nonneighbor-weight", type=float, default=1.0)
    t.add_argument("--svm-c", type=float, default=1.0)
    t.add_argument("--svm-epochs", type=int, default=200)
    t.add_argument("--svm-same-class", choices=("min", "zero"), default="min",
                   help="distance rule for same-class pairs in the svm target")
    t.add_argument("--seed", type=int, default=42)
    t.set_defaults(func=cmd_make_target)

    e = sub.add_parser("embed", help="compute a PCA or ISOMAP embedding (e.g. as a clone source)")
    e.add_argument("--data", required=True)
    e.add_argument("--method", required=True, choices=("pca", "isomap"))
    e.add_argument("--dims", type=int, required=True)
    e.add_argument("--k", type=int, default=10, help="neighbours for isomap")
    e.add_argument("--keep-labels", action="store_true")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_embed)

    f = sub.add_parser("fit", help="learn a projection for a dataset and target")
    f.add_argument("--data", required=True)
    f.add_argument("--target", required=True)
    f.add_argument("--out", required=True, help="model file to write")
    f.add_argument("--mode", choices=("linear", "kernel"), default="linear")
    f.add_argument("--dims", type=int, default=2)
    f.add_argument("--iters", type=int, help="default 500 (linear) / 1000 (kernel)")
    f.add_argument("--lr", type=float, help="default 1e-3 (linear) / 1e-5 (kernel)")
    f.add_argument("--alpha-p", type=float, default=1.0)
    f.add_argument("--kernel", choices=("rbf", "linear", "poly"), default="rbf")
    f.add_argument("--gamma", type=_sigma_arg, default="auto")
    f.add_argument("--degree", type=int, default=3)
    f.add_argument("--coef0", type=float, default=1.0)
    f.add_argument("--init", choices=("pca", "random"), default="pca")
    f.add_argument("--seed", type=int, default=42)
    f.set_defaults(func=cmd_fit)

    r = sub.add_parser("transform", help="project a dataset with a fitted model")
    r.add_argument("--model", required=True)
    r.add_argument("--data", required=True)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_transform)

    v = sub.add_parser("eval", help="NCC accuracy in the learned space")
    v.add_argument("--model", required=True)
    v.add_argument("--train", required=True)
    v.add_argument("--test", required=True)
    v.add_argument("--classifier", choices=("ncc",), default="ncc")
    v.set_defaults(func=cmd_eval)

    g = sub.add_parser("gradcheck", help="finite-difference check of all analytic gradients")
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--sizes", type=_sizes_arg, default=(10, 6, 3), help="max N,d,m")
    g.add_argument("--instances", type=int, default=20)
    g.add_argument("--tol", type=float, default=1e-4)
    g.set_defaults(func=cmd_gradcheck)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, EmptyDataset, InvalidLabels, InvalidParameter) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateKernel, DisconnectedGraph, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidData, DimensionMismatch, InvalidMask, MissingModel, FileFormatError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
