"""Budgeted random pipeline search scored by cross-validation.

Each candidate draws its configuration from a counter-based stream
keyed only by (seed, candidate index), and the folds are fixed up
front, so running with a larger budget evaluates a strict superset of
the candidates and the best cross-validation score can only improve.
"""

from __future__ import annotations

import numpy as np

from ..errors import PreconditionError, QutritmlError, SearchError
from ..sampler import SeedSpec, make_generator
from . import pipeline
from .pipeline import TASK_REGRESS, PipelineModel

# Frozen search space. Changing these changes every seeded search, so
# they are part of the package's compatibility surface.
SEARCH_RANKS = (None, 50, 200)
SEARCH_SPACE = {
    "LogisticRegression": {
        "l2": ("log", 1e-4, 1e1),
        "learning_rate": ("choice", (0.2, 0.5)),
        "iters": ("choice", (300,)),
    },
    "KNearest": {
        "k": ("choice", (1, 3, 5, 7, 11, 15, 21)),
        "weights": ("choice", ("uniform", "distance")),
    },
    "DecisionTree": {
        "max_depth": ("int", 3, 12),
        "min_samples_leaf": ("choice", (1, 2, 4, 8)),
    },
    "RandomForest": {
        "n_trees": ("choice", (30, 60, 100)),
        "max_depth": ("int", 4, 12),
        "min_samples_leaf": ("choice", (1, 2, 4)),
        "max_features": ("choice", ("sqrt", 0.3)),
    },
    "GradientBoosting": {
        "n_rounds": ("choice", (50, 100, 200)),
        "learning_rate": ("choice", (0.03, 0.1, 0.3)),
        "max_depth": ("choice", (2, 3)),
        "min_samples_leaf": ("choice", (1, 4)),
    },
    "MultiLayerPerceptron": {
        "hidden": ("choice", ((64,), (128,), (64, 32))),
        "activation": ("choice", ("tanh", "relu")),
        "learning_rate": ("choice", (1e-3, 3e-3)),
        "iters": ("choice", (150, 300)),
        "l2": ("choice", (0.0, 1e-4)),
    },
}
_KINDS = tuple(SEARCH_SPACE)
N_FOLDS = 5


def sample_config(rng: np.random.Generator, task: str) -> dict:
    """Draw one pipeline config (rank, kind, hyper) from the frozen space."""
    rank = SEARCH_RANKS[rng.integers(len(SEARCH_RANKS))]
    kind = _KINDS[rng.integers(len(_KINDS))]
    hyper = {}
    for name, spec in SEARCH_SPACE[kind].items():
        if spec[0] == "choice":
            opts = spec[1]
            hyper[name] = opts[rng.integers(len(opts))]
        elif spec[0] == "int":
            hyper[name] = int(rng.integers(spec[1], spec[2] + 1))
        elif spec[0] == "log":
            lo, hi = np.log10(spec[1]), np.log10(spec[2])
            hyper[name] = float(10.0 ** (lo + (hi - lo) * rng.random()))
    return {"kind": kind, "hyper": hyper, "rank": rank}


def stratified_folds(rows, task: str, seed: SeedSpec,
                     n_folds: int = N_FOLDS) -> np.ndarray:
    """Fold id per row; classification deals each class out cyclically."""
    n = len(rows)
    rng = make_generator(seed)
    fold = np.empty(n, dtype=np.int64)
    if task == TASK_REGRESS:
        order = rng.permutation(n)
        fold[order] = np.arange(n) % n_folds
        return fold
    labels = np.array([r.label for r in rows])
    for lab in sorted(set(labels)):
        idx = np.flatnonzero(labels == lab)
        idx = idx[rng.permutation(idx.size)]
        fold[idx] = np.arange(idx.size) % n_folds
    return fold


def _cv_score(task: str, rows, config: dict, fold: np.ndarray,
              est_seed: SeedSpec) -> float:
    """Mean accuracy (classification) or negative MAE over the folds."""
    scores = []
    for f in range(N_FOLDS):
        train = [r for r, g in zip(rows, fold) if g != f]
        val = [r for r, g in zip(rows, fold) if g == f]
        if not val or not train:
            continue
        model = pipeline.fit(task, train, config, seed=est_seed)
        pred = pipeline.predict(model, val)
        if task == TASK_REGRESS:
            truth = np.array([r.gr for r in val])
            scores.append(-float(np.mean(np.abs(pred - truth))))
        else:
            truth = np.array([r.label for r in val])
            scores.append(float(np.mean(pred == truth)))
    if not scores:
        raise PreconditionError("no usable folds for cross-validation")
    return float(np.mean(scores))


def auto_search(task: str, rows, budget: int,
                seed: SeedSpec = SeedSpec(0, 0)) -> PipelineModel:
    """Random search over the frozen space; returns the refitted best.

    The returned model carries cv_score and the full search trace
    (one entry per candidate, including failed ones).
    """
    if budget < 1:
        raise PreconditionError("budget must be >= 1")
    fold = stratified_folds(rows, task, seed)
    trace: list[dict] = []
    best_score = -np.inf
    best_i = -1
    best_config: dict | None = None
    for i in range(budget):
        rng = make_generator(SeedSpec(seed.master_seed,
                                      seed.stream_index + 1 + 2 * i))
        est_seed = SeedSpec(seed.master_seed, seed.stream_index + 2 + 2 * i)
        config = sample_config(rng, task)
        entry = {"candidate": i, "kind": config["kind"],
                 "rank": config["rank"],
                 "hyper": {k: pipeline._jsonable(v)
                           for k, v in config["hyper"].items()}}
        try:
            score = _cv_score(task, rows, config, fold, est_seed)
            entry["cv_score"] = score
        except QutritmlError as exc:
            entry["error"] = str(exc)
            trace.append(entry)
            continue
        trace.append(entry)
        if score > best_score:
            best_score, best_i, best_config = score, i, config
    if best_config is None:
        raise SearchError(
            "all candidates failed; trace: "
            + "; ".join(f"{t['candidate']}:{t['kind']}:{t.get('error')}"
                        for t in trace))
    est_seed = SeedSpec(seed.master_seed, seed.stream_index + 2 + 2 * best_i)
    model = pipeline.fit(task, rows, best_config, seed=est_seed)
    model.cv_score = best_score
    model.search_trace = trace
    return model
