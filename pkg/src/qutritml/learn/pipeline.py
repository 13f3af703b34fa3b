"""Preprocessing + estimator pipelines with a versioned model container.

A pipeline owns the z-score statistics (training rows only), an
optional truncated-SVD projection, the class-label ordering, and the
fitted estimator. Models round-trip through a self-describing .npz
container and reload to bit-identical predictions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..dataset.features import expand_features
from ..dataset.io import FeatureRow
from ..dataset.labeling import LABELS
from ..errors import DimensionError, FormatError, PreconditionError
from ..sampler import SeedSpec
from .estimators import ESTIMATOR_KINDS, build_estimator

TASK_BINARY = "binary"
TASK_MULTI = "multi"
TASK_REGRESS = "regress"
TASKS = (TASK_BINARY, TASK_MULTI, TASK_REGRESS)

MODEL_FORMAT = "qutritml-model"
MODEL_VERSION = 1

# estimator kinds whose fit consumes randomness
_SEEDED_KINDS = ("RandomForest", "MultiLayerPerceptron")


@dataclass
class PipelineModel:
    task: str
    labels: tuple[str, ...]
    in_width: int
    mean: np.ndarray
    scale: np.ndarray
    components: np.ndarray | None  # (rank, in_width) projection or None
    estimator: object
    kind: str
    hyper: dict
    cv_score: float | None = None
    search_trace: list = field(default_factory=list)


def rows_matrix(rows: list[FeatureRow]) -> tuple[np.ndarray, list[str], np.ndarray]:
    """Stack rows into (features, labels, gr) arrays."""
    if not rows:
        raise PreconditionError("no rows given")
    widths = {r.features.size for r in rows}
    if len(widths) != 1:
        raise DimensionError(f"rows have mixed feature widths {sorted(widths)}")
    x = np.vstack([r.features for r in rows]).astype(float)
    labels = [r.label for r in rows]
    gr = np.array([r.gr for r in rows], dtype=float)
    return x, labels, gr


def task_labels(task: str, present: set[str]) -> tuple[str, ...]:
    """Class ordering for a task; validates the labels that occur."""
    if task == TASK_BINARY:
        if not present <= {"SEP", "PPTES"}:
            bad = sorted(present - {"SEP", "PPTES"})
            raise PreconditionError(
                f"binary task accepts only PPT states (SEP, PPTES); got {bad}")
        return ("SEP", "PPTES")
    if task == TASK_MULTI:
        return tuple(l for l in LABELS if l in present)
    if task == TASK_REGRESS:
        return ()
    raise PreconditionError(f"unknown task {task!r}; expected one of {TASKS}")


def _principal_components(xs: np.ndarray, rank: int) -> np.ndarray:
    """Top right-singular vectors with a fixed sign convention."""
    r = min(rank, xs.shape[0], xs.shape[1])
    _, _, vt = np.linalg.svd(xs, full_matrices=False)
    comps = vt[:r]
    for i in range(r):
        j = int(np.argmax(np.abs(comps[i])))
        if comps[i, j] < 0:
            comps[i] = -comps[i]
    return comps


def _preprocess(model: PipelineModel, x: np.ndarray) -> np.ndarray:
    xp = (x - model.mean) / model.scale
    if model.components is not None:
        xp = xp @ model.components.T
    return xp


def fit(task: str, rows: list[FeatureRow], config: dict | None = None,
        seed: SeedSpec = SeedSpec(0, 0)) -> PipelineModel:
    """Fit one pipeline: z-score, optional projection, estimator.

    config keys: kind (estimator name), hyper (kind-specific dict),
    rank (None, or target dimension of the linear projection).
    """
    config = dict(config or {})
    kind = config.get("kind", "LogisticRegression")
    hyper = dict(config.get("hyper", {}))
    rank = config.get("rank")
    if kind not in ESTIMATOR_KINDS:
        raise PreconditionError(f"unknown estimator kind {kind!r}")

    x, labels, gr = rows_matrix(rows)
    if not np.all(np.isfinite(x)):
        raise PreconditionError("non-finite feature values in training rows")
    present = set(labels)
    lab = task_labels(task, present)
    if task != TASK_REGRESS:
        occurring = [l for l in lab if l in present]
        if len(occurring) < 2:
            raise PreconditionError(
                f"classification needs at least 2 classes, got {sorted(present)}")

    mean = x.mean(axis=0)
    std = x.std(axis=0)
    scale = np.where(std > 0, std, 1.0)
    xs = (x - mean) / scale
    comps = _principal_components(xs, int(rank)) if rank else None
    xp = xs @ comps.T if comps is not None else xs

    if kind in _SEEDED_KINDS and "seed" not in hyper:
        hyper["seed"] = seed
    est = build_estimator(kind, hyper)
    if task == TASK_REGRESS:
        est.fit(xp, gr, n_classes=0)
    else:
        code = {l: i for i, l in enumerate(lab)}
        y = np.array([code[l] for l in labels], dtype=np.int64)
        est.fit(xp, y, n_classes=len(lab))

    return PipelineModel(task=task, labels=lab, in_width=x.shape[1],
                         mean=mean, scale=scale, components=comps,
                         estimator=est, kind=kind, hyper=hyper)


def predict(model: PipelineModel, rows) -> np.ndarray:
    """Labels (classification) or clamped GR estimates (regression)."""
    if isinstance(rows, np.ndarray):
        x = np.asarray(rows, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
    else:
        x, _, _ = rows_matrix(rows)
    if x.shape[1] != model.in_width:
        raise DimensionError(
            f"feature width {x.shape[1]} does not match model width {model.in_width}")
    xp = _preprocess(model, x)
    raw = model.estimator.predict(xp)
    if model.task == TASK_REGRESS:
        return np.maximum(raw, 0.0)
    return np.array([model.labels[i] for i in raw])


def predict_tomogram(model: PipelineModel, c: np.ndarray):
    """Predict from one 80-entry tomogram, expanding if the model needs it."""
    c = np.asarray(c, dtype=float).ravel()
    if c.size != 80:
        raise DimensionError(f"tomogram must have 80 entries, got {c.size}")
    x = expand_features(c).ravel() if model.in_width == 3400 else c
    out = predict(model, x[None, :])
    return float(out[0]) if model.task == TASK_REGRESS else str(out[0])


def _jsonable(v):
    if isinstance(v, SeedSpec):
        return {"__seed__": [v.master_seed, v.stream_index]}
    if isinstance(v, tuple):
        return list(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def _unjson(v):
    if isinstance(v, dict) and "__seed__" in v:
        return SeedSpec(*v["__seed__"])
    if isinstance(v, list):
        return tuple(v)
    return v


def save_model(model: PipelineModel, path: str) -> None:
    est_meta, est_arrays = model.estimator.to_blob()
    meta = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "task": model.task,
        "labels": list(model.labels),
        "in_width": model.in_width,
        "kind": model.kind,
        "hyper": {k: _jsonable(v) for k, v in model.hyper.items()},
        "cv_score": model.cv_score,
        "search_trace": model.search_trace,
        "has_components": model.components is not None,
        "estimator_meta": est_meta,
    }
    arrays = {"mean": model.mean, "scale": model.scale}
    if model.components is not None:
        arrays["components"] = model.components
    for k, v in est_arrays.items():
        arrays[f"est_{k}"] = v
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta, sort_keys=True)), **arrays)


def load_model(path: str) -> PipelineModel:
    try:
        data = np.load(path, allow_pickle=False)
    except Exception as exc:
        raise FormatError(f"cannot read model file {path}: {exc}") from exc
    if "meta" not in data:
        raise FormatError(f"{path} is not a model container (no meta entry)")
    meta = json.loads(str(data["meta"][()]))
    if meta.get("format") != MODEL_FORMAT:
        raise FormatError(f"{path}: unexpected container format {meta.get('format')!r}")
    if meta.get("version") != MODEL_VERSION:
        raise FormatError(
            f"{path}: model format version {meta.get('version')} "
            f"is not supported (expected {MODEL_VERSION})")
    est_cls = ESTIMATOR_KINDS.get(meta["kind"])
    if est_cls is None:
        raise FormatError(f"{path}: unknown estimator kind {meta['kind']!r}")
    est_arrays = {k[len("est_"):]: data[k] for k in data.files
                  if k.startswith("est_")}
    est = est_cls.from_blob(meta["estimator_meta"], est_arrays)
    return PipelineModel(
        task=meta["task"], labels=tuple(meta["labels"]),
        in_width=meta["in_width"], mean=data["mean"], scale=data["scale"],
        components=data["components"] if meta["has_components"] else None,
        estimator=est, kind=meta["kind"],
        hyper={k: _unjson(v) for k, v in meta["hyper"].items()},
        cv_score=meta["cv_score"], search_trace=meta["search_trace"])
