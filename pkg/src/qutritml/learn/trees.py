"""Histogram-based decision trees and the ensembles built on them.

Features are digitized once into at most 32 quantile bins; split search
then scores every (feature, threshold) pair with a single bincount per
node, which keeps full CART exact up to bin resolution while staying
fast on thousands of columns. The same core powers the single tree,
bagged forests (per-node feature subsets), and gradient boosting
(shallow regression trees on residuals or class gradients).
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError, PreconditionError
from ..sampler import SeedSpec, make_generator

MAX_BINS = 32


def quantile_edges(x: np.ndarray, bins: int = MAX_BINS) -> np.ndarray:
    """Inner quantile edges (bins-1, n_features) for digitizing columns."""
    qs = np.linspace(0.0, 1.0, bins + 1)[1:-1]
    return np.quantile(x, qs, axis=0)


def digitize(x: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Map values to bin codes 0..bins-1 using per-column edges."""
    n, f = x.shape
    out = np.empty((n, f), dtype=np.uint8)
    chunk = max(1, 2_000_000 // max(edges.shape[0] * max(n, 1), 1))
    for j0 in range(0, f, chunk):
        sl = slice(j0, min(j0 + chunk, f))
        out[:, sl] = (x[None, :, sl] >= edges[:, None, sl]).sum(axis=0)
    return out


class _Tree:
    """One fitted tree over binned features; flat-array node storage."""

    __slots__ = ("feature", "thresh", "left", "right", "values", "is_leaf")

    def __init__(self) -> None:
        self.feature: np.ndarray | None = None


def _split_classification(xb: np.ndarray, y: np.ndarray, n_classes: int,
                          bins: int, min_leaf: int) -> tuple[int, int] | None:
    """Best (feature, bin) by weighted Gini, or None if nothing improves."""
    m, f = xb.shape
    codes = (np.arange(f, dtype=np.int64)[None, :] * bins
             + xb.astype(np.int64)) * n_classes + y[:, None]
    cnt = np.bincount(codes.ravel(), minlength=f * bins * n_classes)
    cnt = cnt.reshape(f, bins, n_classes).astype(float)
    cum = cnt.cumsum(axis=1)
    total = cum[:, -1, :]
    left = cum[:, :-1, :]
    right = total[:, None, :] - left
    ln = left.sum(axis=2)
    rn = right.sum(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        gini_l = 1.0 - np.square(left / ln[..., None]).sum(axis=2)
        gini_r = 1.0 - np.square(right / rn[..., None]).sum(axis=2)
    score = (ln * gini_l + rn * gini_r) / m
    score[(ln < min_leaf) | (rn < min_leaf)] = np.inf
    flat = int(np.argmin(score))
    best = score.flat[flat]
    parent = 1.0 - np.square(total[0] / m).sum()
    if not np.isfinite(best) or best >= parent - 1e-12:
        return None
    return divmod(flat, bins - 1)


def _split_regression(xb: np.ndarray, y: np.ndarray, bins: int,
                      min_leaf: int) -> tuple[int, int] | None:
    """Best (feature, bin) by summed squared error, or None."""
    m, f = xb.shape
    codes = np.arange(f, dtype=np.int64)[None, :] * bins + xb.astype(np.int64)
    flatc = codes.ravel()
    w = np.repeat(y, f)
    cnt = np.bincount(flatc, minlength=f * bins).reshape(f, bins).astype(float)
    s1 = np.bincount(flatc, weights=w, minlength=f * bins).reshape(f, bins)
    s2 = np.bincount(flatc, weights=w * np.repeat(y, f), minlength=f * bins)
    s2 = s2.reshape(f, bins)
    cn, c1, c2 = cnt.cumsum(1), s1.cumsum(1), s2.cumsum(1)
    ln, l1, l2 = cn[:, :-1], c1[:, :-1], c2[:, :-1]
    rn = cn[:, -1:] - ln
    r1 = c1[:, -1:] - l1
    r2 = c2[:, -1:] - l2
    with np.errstate(divide="ignore", invalid="ignore"):
        score = (l2 - l1 * l1 / ln) + (r2 - r1 * r1 / rn)
    score[(ln < min_leaf) | (rn < min_leaf)] = np.inf
    flat = int(np.argmin(score))
    best = score.flat[flat]
    parent = float(np.sum(y * y) - np.square(np.sum(y)) / m)
    if not np.isfinite(best) or best >= parent - 1e-12:
        return None
    return divmod(flat, bins - 1)


def _build_tree(xb: np.ndarray, y: np.ndarray, *, n_classes: int, bins: int,
                max_depth: int, min_leaf: int, max_features: int | None,
                rng: np.random.Generator | None) -> _Tree:
    """Grow a tree breadth-first over binned features.

    n_classes = 0 means regression. max_features selects a fresh
    feature subset per node when smaller than the total count.
    """
    n, f_total = xb.shape
    feature: list[int] = []
    thresh: list[int] = []
    left: list[int] = []
    right: list[int] = []
    values: list[np.ndarray | float] = []
    queue: list[tuple[np.ndarray, int, int]] = [(np.arange(n), 0, 0)]
    feature.append(-1)
    thresh.append(-1)
    left.append(-1)
    right.append(-1)
    values.append(0.0)

    while queue:
        idx, depth, node = queue.pop(0)
        yn = y[idx]
        if n_classes:
            dist = np.bincount(yn, minlength=n_classes).astype(float)
            values[node] = dist / dist.sum()
            pure = np.max(dist) == dist.sum()
        else:
            values[node] = float(yn.mean())
            pure = bool(np.all(yn == yn[0]))
        if depth >= max_depth or idx.size < 2 * min_leaf or pure:
            continue
        if max_features is not None and max_features < f_total:
            feats = np.sort(rng.choice(f_total, size=max_features, replace=False))
        else:
            feats = None
        xn = xb[idx] if feats is None else xb[np.ix_(idx, feats)]
        got = (_split_classification(xn, yn, n_classes, bins, min_leaf)
               if n_classes else _split_regression(xn, yn, bins, min_leaf))
        if got is None:
            continue
        f_local, b = got
        f_global = int(f_local if feats is None else feats[f_local])
        go_left = xb[idx, f_global] <= b
        li, ri = idx[go_left], idx[~go_left]
        feature[node] = f_global
        thresh[node] = int(b)
        for child_idx, slot in ((li, "left"), (ri, "right")):
            cid = len(feature)
            feature.append(-1)
            thresh.append(-1)
            left.append(-1)
            right.append(-1)
            values.append(0.0)
            (left if slot == "left" else right)[node] = cid
            queue.append((child_idx, depth + 1, cid))

    t = _Tree()
    t.feature = np.array(feature, dtype=np.int32)
    t.thresh = np.array(thresh, dtype=np.int32)
    t.left = np.array(left, dtype=np.int32)
    t.right = np.array(right, dtype=np.int32)
    t.is_leaf = t.feature < 0
    if n_classes:
        t.values = np.vstack([np.asarray(v, dtype=float).reshape(1, -1)
                              for v in values])
    else:
        t.values = np.array(values, dtype=float)
    return t


def _apply_tree(t: _Tree, xb: np.ndarray) -> np.ndarray:
    """Leaf values for each binned row."""
    n = xb.shape[0]
    cur = np.zeros(n, dtype=np.int64)
    rows = np.arange(n)
    for _ in range(64):
        at_leaf = t.is_leaf[cur]
        if np.all(at_leaf):
            break
        feat = np.where(at_leaf, 0, t.feature[cur])
        go_left = xb[rows, feat] <= t.thresh[cur]
        nxt = np.where(go_left, t.left[cur], t.right[cur])
        cur = np.where(at_leaf, cur, nxt)
    return t.values[cur]


def _tree_blob(t: _Tree, prefix: str) -> dict[str, np.ndarray]:
    return {
        f"{prefix}feature": t.feature,
        f"{prefix}thresh": t.thresh,
        f"{prefix}left": t.left,
        f"{prefix}right": t.right,
        f"{prefix}values": t.values,
    }


def _tree_from_blob(arrays: dict[str, np.ndarray], prefix: str) -> _Tree:
    t = _Tree()
    t.feature = arrays[f"{prefix}feature"]
    t.thresh = arrays[f"{prefix}thresh"]
    t.left = arrays[f"{prefix}left"]
    t.right = arrays[f"{prefix}right"]
    t.values = arrays[f"{prefix}values"]
    t.is_leaf = t.feature < 0
    return t


def _check_xy(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise DimensionError("X must be (n, d) with one target per row")
    if x.shape[0] < 1:
        raise PreconditionError("need at least one training row")
    return x, y


class DecisionTree:
    """CART over quantile-binned features; classification or regression."""

    kind = "DecisionTree"

    def __init__(self, max_depth: int = 8, min_samples_leaf: int = 1,
                 bins: int = MAX_BINS):
        if not 2 <= bins <= MAX_BINS:
            raise PreconditionError(f"bins must lie in [2, {MAX_BINS}]")
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.bins = bins
        self.n_classes = 0
        self.edges: np.ndarray | None = None
        self.tree: _Tree | None = None

    def fit(self, x: np.ndarray, y: np.ndarray, n_classes: int = 0) -> "DecisionTree":
        x, y = _check_xy(x, y)
        self.n_classes = n_classes
        self.edges = quantile_edges(x, self.bins)
        xb = digitize(x, self.edges)
        yy = y.astype(np.int64) if n_classes else y.astype(float)
        self.tree = _build_tree(
            xb, yy, n_classes=n_classes, bins=self.bins,
            max_depth=self.max_depth, min_leaf=self.min_samples_leaf,
            max_features=None, rng=None)
        return self

    def predict_values(self, x: np.ndarray) -> np.ndarray:
        """Class distribution rows (classification) or means (regression)."""
        xb = digitize(np.asarray(x, dtype=float), self.edges)
        return _apply_tree(self.tree, xb)

    def predict(self, x: np.ndarray) -> np.ndarray:
        vals = self.predict_values(x)
        return np.argmax(vals, axis=1) if self.n_classes else vals

    def to_blob(self) -> tuple[dict, dict[str, np.ndarray]]:
        meta = {"kind": self.kind, "max_depth": self.max_depth,
                "min_samples_leaf": self.min_samples_leaf, "bins": self.bins,
                "n_classes": self.n_classes}
        arrays = {"edges": self.edges}
        arrays.update(_tree_blob(self.tree, "t0_"))
        return meta, arrays

    @classmethod
    def from_blob(cls, meta: dict, arrays: dict[str, np.ndarray]) -> "DecisionTree":
        m = cls(max_depth=meta["max_depth"],
                min_samples_leaf=meta["min_samples_leaf"], bins=meta["bins"])
        m.n_classes = meta["n_classes"]
        m.edges = arrays["edges"]
        m.tree = _tree_from_blob(arrays, "t0_")
        return m


class RandomForest:
    """Bagged trees with per-node feature subsampling."""

    kind = "RandomForest"

    def __init__(self, n_trees: int = 60, max_depth: int = 10,
                 min_samples_leaf: int = 1, max_features: str | float = "sqrt",
                 bins: int = MAX_BINS, seed: SeedSpec = SeedSpec(0, 0)):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bins = bins
        self.seed = seed
        self.n_classes = 0
        self.edges: np.ndarray | None = None
        self.trees: list[_Tree] = []

    def _m_features(self, f: int) -> int:
        if self.max_features == "sqrt":
            return max(1, int(np.sqrt(f)))
        return max(1, int(float(self.max_features) * f))

    def fit(self, x: np.ndarray, y: np.ndarray, n_classes: int = 0) -> "RandomForest":
        x, y = _check_xy(x, y)
        self.n_classes = n_classes
        self.edges = quantile_edges(x, self.bins)
        xb = digitize(x, self.edges)
        yy = y.astype(np.int64) if n_classes else y.astype(float)
        n, f = xb.shape
        m = self._m_features(f)
        self.trees = []
        for t in range(self.n_trees):
            rng = make_generator(SeedSpec(
                self.seed.master_seed, self.seed.stream_index + t))
            boot = rng.integers(0, n, size=n)
            self.trees.append(_build_tree(
                xb[boot], yy[boot], n_classes=n_classes, bins=self.bins,
                max_depth=self.max_depth, min_leaf=self.min_samples_leaf,
                max_features=m, rng=rng))
        return self

    def predict_values(self, x: np.ndarray) -> np.ndarray:
        xb = digitize(np.asarray(x, dtype=float), self.edges)
        acc = None
        for t in self.trees:
            v = _apply_tree(t, xb)
            acc = v if acc is None else acc + v
        return acc / len(self.trees)

    def predict(self, x: np.ndarray) -> np.ndarray:
        vals = self.predict_values(x)
        return np.argmax(vals, axis=1) if self.n_classes else vals

    def to_blob(self) -> tuple[dict, dict[str, np.ndarray]]:
        meta = {"kind": self.kind, "n_trees": self.n_trees,
                "max_depth": self.max_depth,
                "min_samples_leaf": self.min_samples_leaf,
                "max_features": self.max_features, "bins": self.bins,
                "n_classes": self.n_classes,
                "seed": [self.seed.master_seed, self.seed.stream_index]}
        arrays = {"edges": self.edges}
        for k, t in enumerate(self.trees):
            arrays.update(_tree_blob(t, f"t{k}_"))
        return meta, arrays

    @classmethod
    def from_blob(cls, meta: dict, arrays: dict[str, np.ndarray]) -> "RandomForest":
        m = cls(n_trees=meta["n_trees"], max_depth=meta["max_depth"],
                min_samples_leaf=meta["min_samples_leaf"],
                max_features=meta["max_features"], bins=meta["bins"],
                seed=SeedSpec(*meta["seed"]))
        m.n_classes = meta["n_classes"]
        m.edges = arrays["edges"]
        m.trees = [_tree_from_blob(arrays, f"t{k}_") for k in range(m.n_trees)]
        return m


def _softmax(s: np.ndarray) -> np.ndarray:
    z = s - s.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class GradientBoosting:
    """Shallow regression trees fit to residuals or class gradients."""

    kind = "GradientBoosting"

    def __init__(self, n_rounds: int = 100, learning_rate: float = 0.1,
                 max_depth: int = 3, min_samples_leaf: int = 4,
                 bins: int = MAX_BINS):
        self.n_rounds = n_rounds
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.bins = bins
        self.n_classes = 0
        self.base = 0.0
        self.edges: np.ndarray | None = None
        self.trees: list[_Tree] = []  # classification: round-major per class

    def _grow(self, xb: np.ndarray, target: np.ndarray) -> _Tree:
        return _build_tree(
            xb, target.astype(float), n_classes=0, bins=self.bins,
            max_depth=self.max_depth, min_leaf=self.min_samples_leaf,
            max_features=None, rng=None)

    def fit(self, x: np.ndarray, y: np.ndarray, n_classes: int = 0) -> "GradientBoosting":
        x, y = _check_xy(x, y)
        self.n_classes = n_classes
        self.edges = quantile_edges(x, self.bins)
        xb = digitize(x, self.edges)
        self.trees = []
        if n_classes:
            onehot = np.eye(n_classes)[y.astype(np.int64)]
            scores = np.zeros((x.shape[0], n_classes))
            self.base = 0.0
            for _ in range(self.n_rounds):
                p = _softmax(scores)
                grad = onehot - p
                for c in range(n_classes):
                    t = self._grow(xb, grad[:, c])
                    scores[:, c] += self.learning_rate * _apply_tree(t, xb)
                    self.trees.append(t)
        else:
            yy = y.astype(float)
            self.base = float(yy.mean())
            pred = np.full(x.shape[0], self.base)
            for _ in range(self.n_rounds):
                t = self._grow(xb, yy - pred)
                pred += self.learning_rate * _apply_tree(t, xb)
                self.trees.append(t)
        return self

    def predict_values(self, x: np.ndarray) -> np.ndarray:
        xb = digitize(np.asarray(x, dtype=float), self.edges)
        if self.n_classes:
            scores = np.zeros((xb.shape[0], self.n_classes))
            for k, t in enumerate(self.trees):
                scores[:, k % self.n_classes] += self.learning_rate * _apply_tree(t, xb)
            return _softmax(scores)
        pred = np.full(xb.shape[0], self.base)
        for t in self.trees:
            pred += self.learning_rate * _apply_tree(t, xb)
        return pred

    def predict(self, x: np.ndarray) -> np.ndarray:
        vals = self.predict_values(x)
        return np.argmax(vals, axis=1) if self.n_classes else vals

    def to_blob(self) -> tuple[dict, dict[str, np.ndarray]]:
        meta = {"kind": self.kind, "n_rounds": self.n_rounds,
                "learning_rate": self.learning_rate, "max_depth": self.max_depth,
                "min_samples_leaf": self.min_samples_leaf, "bins": self.bins,
                "n_classes": self.n_classes, "base": self.base,
                "n_stored": len(self.trees)}
        arrays = {"edges": self.edges}
        for k, t in enumerate(self.trees):
            arrays.update(_tree_blob(t, f"t{k}_"))
        return meta, arrays

    @classmethod
    def from_blob(cls, meta: dict, arrays: dict[str, np.ndarray]) -> "GradientBoosting":
        m = cls(n_rounds=meta["n_rounds"], learning_rate=meta["learning_rate"],
                max_depth=meta["max_depth"],
                min_samples_leaf=meta["min_samples_leaf"], bins=meta["bins"])
        m.n_classes = meta["n_classes"]
        m.base = meta["base"]
        m.edges = arrays["edges"]
        m.trees = [_tree_from_blob(arrays, f"t{k}_")
                   for k in range(meta["n_stored"])]
        return m
