"""From-scratch estimators: linear, nearest-neighbour, neural.

All estimators share one contract: fit(x, y, n_classes) with integer
class codes when n_classes > 0 and float targets otherwise, predict(x)
returning codes or reals, and to_blob/from_blob for serialization.
Ties in any argmax resolve to the lowest class code so repeated runs
agree bit for bit.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError, PreconditionError
from ..sampler import SeedSpec, make_generator
from .trees import DecisionTree, GradientBoosting, RandomForest, _check_xy


def softmax(s: np.ndarray) -> np.ndarray:
    z = s - s.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class LogisticRegression:
    """Softmax regression by gradient descent; ridge in regression mode."""

    kind = "LogisticRegression"

    def __init__(self, l2: float = 1e-2, learning_rate: float = 0.5,
                 iters: int = 300):
        self.l2 = l2
        self.learning_rate = learning_rate
        self.iters = iters
        self.n_classes = 0
        self.weights: np.ndarray | None = None  # (d, C) or (d,)
        self.bias: np.ndarray | float = 0.0

    def fit(self, x: np.ndarray, y: np.ndarray, n_classes: int = 0) -> "LogisticRegression":
        x, y = _check_xy(x, y)
        self.n_classes = n_classes
        n, d = x.shape
        if n_classes:
            onehot = np.eye(n_classes)[y.astype(np.int64)]
            w = np.zeros((d, n_classes))
            b = np.zeros(n_classes)
            vw = np.zeros_like(w)
            vb = np.zeros_like(b)
            for _ in range(self.iters):
                p = softmax(x @ w + b)
                err = (p - onehot) / n
                gw = x.T @ err + self.l2 * w
                gb = err.sum(axis=0)
                vw = 0.9 * vw + gw
                vb = 0.9 * vb + gb
                w -= self.learning_rate * vw
                b -= self.learning_rate * vb
            self.weights, self.bias = w, b
        else:
            yy = y.astype(float)
            yb = float(yy.mean())
            xm = x.mean(axis=0)
            xc = x - xm
            a = xc.T @ xc + self.l2 * n * np.eye(d)
            w = np.linalg.solve(a, xc.T @ (yy - yb))
            self.weights = w
            self.bias = yb - float(xm @ w)
        return self

    def predict_values(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.n_classes:
            return softmax(x @ self.weights + self.bias)
        return x @ self.weights + self.bias

    def predict(self, x: np.ndarray) -> np.ndarray:
        vals = self.predict_values(x)
        return np.argmax(vals, axis=1) if self.n_classes else vals

    def to_blob(self) -> tuple[dict, dict[str, np.ndarray]]:
        meta = {"kind": self.kind, "l2": self.l2,
                "learning_rate": self.learning_rate, "iters": self.iters,
                "n_classes": self.n_classes}
        arrays = {"weights": np.asarray(self.weights),
                  "bias": np.asarray(self.bias)}
        return meta, arrays

    @classmethod
    def from_blob(cls, meta: dict, arrays: dict[str, np.ndarray]) -> "LogisticRegression":
        m = cls(l2=meta["l2"], learning_rate=meta["learning_rate"],
                iters=meta["iters"])
        m.n_classes = meta["n_classes"]
        m.weights = arrays["weights"]
        b = arrays["bias"]
        m.bias = b if m.n_classes else float(b)
        return m


class KNearest:
    """Brute-force k nearest neighbours with uniform or distance weights."""

    kind = "KNearest"

    def __init__(self, k: int = 5, weights: str = "uniform"):
        if weights not in ("uniform", "distance"):
            raise PreconditionError("weights must be 'uniform' or 'distance'")
        self.k = k
        self.weights = weights
        self.n_classes = 0
        self.x: np.ndarray | None = None
        self.y: np.ndarray | None = None

    def fit(self, x: np.ndarray, y: np.ndarray, n_classes: int = 0) -> "KNearest":
        x, y = _check_xy(x, y)
        self.n_classes = n_classes
        self.x = x
        self.y = y.astype(np.int64) if n_classes else y.astype(float)
        return self

    def _neighbours(self, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Indices and distances of the k nearest rows, ties by index."""
        d2 = (np.square(q).sum(axis=1)[:, None]
              + np.square(self.x).sum(axis=1)[None, :]
              - 2.0 * q @ self.x.T)
        d2 = np.maximum(d2, 0.0)
        k = min(self.k, self.x.shape[0])
        part = np.argpartition(d2, k - 1, axis=1)[:, :k]
        rows = np.arange(q.shape[0])[:, None]
        sub = d2[rows, part]
        order = np.lexsort((part, sub), axis=1)
        idx = part[rows, order]
        return idx, np.sqrt(d2[rows, idx])

    def predict_values(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = []
        for i0 in range(0, x.shape[0], 256):
            q = x[i0:i0 + 256]
            idx, dist = self._neighbours(q)
            w = (np.ones_like(dist) if self.weights == "uniform"
                 else 1.0 / (dist + 1e-12))
            if self.n_classes:
                votes = np.zeros((q.shape[0], self.n_classes))
                lab = self.y[idx]
                for c in range(self.n_classes):
                    votes[:, c] = np.where(lab == c, w, 0.0).sum(axis=1)
                out.append(votes / votes.sum(axis=1, keepdims=True))
            else:
                out.append((self.y[idx] * w).sum(axis=1) / w.sum(axis=1))
        return np.concatenate(out, axis=0)

    def predict(self, x: np.ndarray) -> np.ndarray:
        vals = self.predict_values(x)
        return np.argmax(vals, axis=1) if self.n_classes else vals

    def to_blob(self) -> tuple[dict, dict[str, np.ndarray]]:
        meta = {"kind": self.kind, "k": self.k, "weights": self.weights,
                "n_classes": self.n_classes}
        return meta, {"x": self.x, "y": self.y}

    @classmethod
    def from_blob(cls, meta: dict, arrays: dict[str, np.ndarray]) -> "KNearest":
        m = cls(k=meta["k"], weights=meta["weights"])
        m.n_classes = meta["n_classes"]
        m.x = arrays["x"]
        m.y = arrays["y"]
        return m


def _act(name: str, z: np.ndarray) -> np.ndarray:
    return np.tanh(z) if name == "tanh" else np.maximum(z, 0.0)


def _act_grad(name: str, h: np.ndarray) -> np.ndarray:
    return 1.0 - h * h if name == "tanh" else (h > 0).astype(float)


class MultiLayerPerceptron:
    """Fully connected net, at most two hidden layers, full-batch Adam.

    Softmax cross-entropy head for classification, linear least-squares
    head for regression. loss_and_grad exposes the exact analytic
    gradient of the current parameters so it can be checked against
    finite differences.
    """

    kind = "MultiLayerPerceptron"

    def __init__(self, hidden: tuple[int, ...] = (64,), activation: str = "tanh",
                 learning_rate: float = 3e-3, iters: int = 300, l2: float = 0.0,
                 seed: SeedSpec = SeedSpec(0, 0)):
        if len(hidden) > 2 or any(h < 1 for h in hidden):
            raise PreconditionError("hidden must be 1 or 2 positive widths")
        if activation not in ("tanh", "relu"):
            raise PreconditionError("activation must be 'tanh' or 'relu'")
        self.hidden = tuple(int(h) for h in hidden)
        self.activation = activation
        self.learning_rate = learning_rate
        self.iters = iters
        self.l2 = l2
        self.seed = seed
        self.n_classes = 0
        self.params: list[np.ndarray] = []  # W0, b0, W1, b1, ...

    def _init_params(self, d: int, out: int) -> None:
        rng = make_generator(self.seed)
        sizes = [d, *self.hidden, out]
        self.params = []
        for a, b in zip(sizes[:-1], sizes[1:]):
            scale = np.sqrt(2.0 / (a + b))
            self.params.append(rng.standard_normal((a, b)) * scale)
            self.params.append(np.zeros(b))

    def _forward(self, x: np.ndarray) -> list[np.ndarray]:
        acts = [x]
        n_layers = len(self.params) // 2
        for k in range(n_layers):
            w, b = self.params[2 * k], self.params[2 * k + 1]
            z = acts[-1] @ w + b
            acts.append(_act(self.activation, z) if k < n_layers - 1 else z)
        return acts

    def loss_and_grad(self, x: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
        """Mean loss and flat gradient at the current parameters."""
        x = np.asarray(x, dtype=float)
        n = x.shape[0]
        acts = self._forward(x)
        z_out = acts[-1]
        if self.n_classes:
            p = softmax(z_out)
            onehot = np.eye(self.n_classes)[np.asarray(y, dtype=np.int64)]
            eps = 1e-300
            loss = -float(np.sum(onehot * np.log(p + eps))) / n
            delta = (p - onehot) / n
        else:
            r = z_out[:, 0] - np.asarray(y, dtype=float)
            loss = 0.5 * float(r @ r) / n
            delta = (r / n)[:, None]
        grads: list[np.ndarray] = [None] * len(self.params)
        n_layers = len(self.params) // 2
        for k in range(n_layers - 1, -1, -1):
            w = self.params[2 * k]
            grads[2 * k] = acts[k].T @ delta + self.l2 * w
            grads[2 * k + 1] = delta.sum(axis=0)
            if k > 0:
                delta = (delta @ w.T) * _act_grad(self.activation, acts[k])
        for k in range(n_layers):
            loss += 0.5 * self.l2 * float(np.sum(self.params[2 * k] ** 2))
        return loss, np.concatenate([g.ravel() for g in grads])

    def get_flat_params(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat_params(self, flat: np.ndarray) -> None:
        pos = 0
        for k, p in enumerate(self.params):
            self.params[k] = flat[pos:pos + p.size].reshape(p.shape).copy()
            pos += p.size
        if pos != flat.size:
            raise DimensionError("flat parameter vector has the wrong length")

    def fit(self, x: np.ndarray, y: np.ndarray, n_classes: int = 0) -> "MultiLayerPerceptron":
        x, y = _check_xy(x, y)
        self.n_classes = n_classes
        self._init_params(x.shape[1], n_classes if n_classes else 1)
        m = np.zeros(self.get_flat_params().size)
        v = np.zeros_like(m)
        b1, b2, eps = 0.9, 0.999, 1e-8
        theta = self.get_flat_params()
        for t in range(1, self.iters + 1):
            _, g = self.loss_and_grad(x, y)
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            mh = m / (1 - b1 ** t)
            vh = v / (1 - b2 ** t)
            theta = theta - self.learning_rate * mh / (np.sqrt(vh) + eps)
            self.set_flat_params(theta)
        return self

    def predict_values(self, x: np.ndarray) -> np.ndarray:
        z = self._forward(np.asarray(x, dtype=float))[-1]
        return softmax(z) if self.n_classes else z[:, 0]

    def predict(self, x: np.ndarray) -> np.ndarray:
        vals = self.predict_values(x)
        return np.argmax(vals, axis=1) if self.n_classes else vals

    def to_blob(self) -> tuple[dict, dict[str, np.ndarray]]:
        meta = {"kind": self.kind, "hidden": list(self.hidden),
                "activation": self.activation,
                "learning_rate": self.learning_rate, "iters": self.iters,
                "l2": self.l2, "n_classes": self.n_classes,
                "seed": [self.seed.master_seed, self.seed.stream_index],
                "n_params": len(self.params)}
        arrays = {f"p{k}": p for k, p in enumerate(self.params)}
        return meta, arrays

    @classmethod
    def from_blob(cls, meta: dict, arrays: dict[str, np.ndarray]) -> "MultiLayerPerceptron":
        m = cls(hidden=tuple(meta["hidden"]), activation=meta["activation"],
                learning_rate=meta["learning_rate"], iters=meta["iters"],
                l2=meta["l2"], seed=SeedSpec(*meta["seed"]))
        m.n_classes = meta["n_classes"]
        m.params = [arrays[f"p{k}"] for k in range(meta["n_params"])]
        return m


ESTIMATOR_KINDS = {
    c.kind: c for c in (LogisticRegression, KNearest, DecisionTree,
                        RandomForest, GradientBoosting, MultiLayerPerceptron)
}


def build_estimator(kind: str, hyper: dict):
    """Instantiate an estimator by kind name with keyword hyperparameters."""
    if kind not in ESTIMATOR_KINDS:
        raise PreconditionError(f"unknown estimator kind {kind!r}")
    return ESTIMATOR_KINDS[kind](**hyper)
