"""Dataset CSVs, embedding CSVs, and the target/model archive format.

Target and model files are ZIP archives readable with ``numpy.load``: every
member is a ``.npy`` array, and the ``meta`` member is a UTF-8 JSON document
stored as a ``uint8`` array. Members are written in a fixed order with a
fixed timestamp so that identical content gives byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import zipfile
from dataclasses import dataclass

import numpy as np

from .core import PreprocessStats
from .errors import EmptyDataset, FileFormatError, InvalidData
from .projections import KernelModel, KernelSpec, LinearModel
from .targets import TargetPair

FORMAT_VERSION = 1
LABEL_COLUMN = "label"
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray | None = None
    feature_names: list[str] | None = None
    label_names: list[str] | None = None

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]


def read_dataset(path, label_column: str = LABEL_COLUMN) -> Dataset:
    """Read a header-bearing CSV; an optional label column is mapped to ids 0..C-1 in order of first appearance."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise EmptyDataset(f"{path}: empty file (a header row is required)")
    header, body = [h.strip() for h in rows[0]], [r for r in rows[1:] if r]
    if not body:
        raise EmptyDataset(f"{path}: no data rows")
    label_idx = header.index(label_column) if label_column in header else None
    feature_idx = [i for i in range(len(header)) if i != label_idx]
    if not feature_idx:
        raise InvalidData(f"{path}: no feature columns")

    features = np.empty((len(body), len(feature_idx)))
    raw_labels = []
    for r, row in enumerate(body):
        if len(row) != len(header):
            raise InvalidData(f"{path}: row {r + 2} has {len(row)} fields, header has {len(header)}")
        try:
            features[r] = [float(row[i]) for i in feature_idx]
        except ValueError as exc:
            raise InvalidData(f"{path}: row {r + 2}: {exc}") from None
        if label_idx is not None:
            raw_labels.append(row[label_idx].strip())
    if not np.all(np.isfinite(features)):
        raise InvalidData(f"{path}: non-finite feature values")

    labels = label_names = None
    if label_idx is not None:
        ids: dict[str, int] = {}
        labels = np.array([ids.setdefault(v, len(ids)) for v in raw_labels], dtype=np.int64)
        label_names = list(ids)
    return Dataset(features, labels, [header[i] for i in feature_idx], label_names)


def write_dataset(path, features, labels=None, feature_names=None) -> None:
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    names = feature_names or [f"x_{i}" for i in range(features.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names) + ([LABEL_COLUMN] if labels is not None else []))
        for i, row in enumerate(features):
            out = [format(float(v), ".17g") for v in row]
            if labels is not None:
                out.append(str(labels[i]))
            w.writerow(out)


def write_embedding(path, Y, labels=None) -> None:
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    write_dataset(path, Y, labels, [f"dim_{i}" for i in range(Y.shape[1])])


def _write_archive(path, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    meta = {"version": FORMAT_VERSION, **meta}
    members = {"meta": np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)}
    members.update(arrays)
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for name, arr in members.items():
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.ascontiguousarray(arr), allow_pickle=False)
            info = zipfile.ZipInfo(f"{name}.npy", date_time=_ZIP_EPOCH)
            info.external_attr = 0o644 << 16
            zf.writestr(info, buf.getvalue())


def _read_archive(path, expected_type: str) -> tuple[dict, dict[str, np.ndarray]]:
    try:
        with np.load(path, allow_pickle=False) as z:
            arrays = {k: z[k] for k in z.files}
    except (OSError, ValueError, zipfile.BadZipFile) as exc:
        raise FileFormatError(f"{path}: not a readable archive ({exc})") from None
    if "meta" not in arrays:
        raise FileFormatError(f"{path}: missing meta member")
    meta = json.loads(arrays.pop("meta").tobytes().decode("utf-8"))
    if meta.get("version") != FORMAT_VERSION:
        raise FileFormatError(f"{path}: unsupported version {meta.get('version')!r}")
    if meta.get("type") != expected_type:
        raise FileFormatError(f"{path}: expected a {expected_type} file, found {meta.get('type')!r}")
    return meta, arrays


def save_target(path, target: TargetPair) -> None:
    _write_archive(path, {"type": "target", "n": target.n_samples, **target.meta}, {"T": target.T, "M": target.M})


def load_target(path) -> TargetPair:
    meta, arrays = _read_archive(path, "target")
    for key in ("T", "M"):
        if key not in arrays:
            raise FileFormatError(f"{path}: missing {key}")
    meta = {k: v for k, v in meta.items() if k not in ("version", "type", "n")}
    return TargetPair(arrays["T"].astype(np.float64), arrays["M"].astype(np.float64), meta)


def save_model(path, model: LinearModel | KernelModel, extra: dict | None = None) -> None:
    meta = {
        "type": "model",
        "mode": "linear" if isinstance(model, LinearModel) else "kernel",
        "preprocess": model.stats.mode,
        "sigma_p": model.sigma_p,
    }
    arrays = {"mean": model.stats.mean, "std": model.stats.std}
    if isinstance(model, LinearModel):
        arrays["W"] = model.W
    else:
        k = model.kernel
        meta["kernel"] = {"kind": k.kind, "gamma": k.gamma, "degree": k.degree, "coef0": k.coef0}
        arrays["A"] = model.A
        arrays["X_train"] = model.X_train
    if extra:
        meta["config"] = extra
    _write_archive(path, meta, arrays)


def load_model(path) -> LinearModel | KernelModel:
    meta, a = _read_archive(path, "model")
    try:
        stats = PreprocessStats(meta["preprocess"], a["mean"], a["std"])
        if meta["mode"] == "linear":
            return LinearModel(W=a["W"], stats=stats, sigma_p=meta.get("sigma_p"))
        if meta["mode"] == "kernel":
            return KernelModel(
                A=a["A"],
                kernel=KernelSpec(**meta["kernel"]),
                X_train=a["X_train"],
                stats=stats,
                sigma_p=meta.get("sigma_p"),
            )
    except KeyError as exc:
        raise FileFormatError(f"{path}: missing field {exc}") from None
    raise FileFormatError(f"{path}: unknown mode {meta['mode']!r}")


def read_model_meta(path) -> dict:
    return _read_archive(path, "model")[0]
