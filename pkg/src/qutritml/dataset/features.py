"""Feature expansion, scaling and stratified splitting.

The 80 tomogram coordinates expand to 3400 columns: the raw values,
their elementwise exponentials, and all products c_i*c_j for i <= j in
row-major upper-triangle order. Scaling is a z-score with statistics
from the rows it was fitted on; applying the same scaler to other rows
reuses those statistics, which keeps test data out of the fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, PreconditionError
from ..sampler import SeedSpec, make_generator

RAW_WIDTH = 80
EXPANDED_WIDTH = 3400

_TRIU_I, _TRIU_J = np.triu_indices(RAW_WIDTH)


def expand_features(c: np.ndarray) -> np.ndarray:
    """Map (n, 80) raw tomograms to (n, 3400) expanded features."""
    c = np.atleast_2d(np.asarray(c, dtype=float))
    if c.shape[1] != RAW_WIDTH:
        raise DimensionError(f"expected {RAW_WIDTH} columns, got {c.shape[1]}")
    quad = c[:, _TRIU_I] * c[:, _TRIU_J]
    return np.concatenate([c, np.exp(c), quad], axis=1)


@dataclass(frozen=True)
class FeatureScaler:
    """Column statistics of a training matrix, reusable on test rows."""

    mean: np.ndarray
    scale: np.ndarray  # std with zero-variance columns replaced by 1
    expand: bool

    def transform(self, c: np.ndarray) -> np.ndarray:
        x = expand_features(c) if self.expand else np.atleast_2d(np.asarray(c, float))
        if x.shape[1] != self.mean.shape[0]:
            raise DimensionError(
                f"width {x.shape[1]} does not match fitted width {self.mean.shape[0]}")
        return (x - self.mean) / self.scale


def featurize(tomograms: np.ndarray,
              expand: bool = True) -> tuple[np.ndarray, FeatureScaler]:
    """Expand and z-score rows, returning the scaled matrix and the scaler.

    Statistics come from the given rows only; reuse the scaler on test
    rows. Zero-variance columns are centered and passed through with a
    unit divisor.
    """
    x = expand_features(tomograms) if expand \
        else np.atleast_2d(np.asarray(tomograms, float))
    if not np.all(np.isfinite(x)):
        raise PreconditionError("features must be finite")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    scale = np.where(std > 0.0, std, 1.0)
    scaler = FeatureScaler(mean=mean, scale=scale, expand=expand)
    return (x - mean) / scale, scaler


def split(rows: list, train_fraction: float,
          seed: SeedSpec = SeedSpec(0, 0)) -> tuple[list, list]:
    """Stratified train/test split of rows carrying a .label attribute.

    Each class is shuffled deterministically and cut at the requested
    fraction (rounded, but never leaving either side of a class empty).
    """
    if not 0.0 < train_fraction < 1.0:
        raise PreconditionError("train_fraction must lie strictly in (0, 1)")
    by_class: dict[str, list[int]] = {}
    for k, row in enumerate(rows):
        by_class.setdefault(row.label, []).append(k)
    for label, idx in by_class.items():
        if len(idx) < 2:
            raise PreconditionError(f"class {label} has fewer than 2 rows")
    rng = make_generator(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for label in sorted(by_class):
        idx = np.array(by_class[label])
        idx = idx[rng.permutation(len(idx))]
        n_train = int(round(train_fraction * len(idx)))
        n_train = min(max(n_train, 1), len(idx) - 1)
        train_idx.extend(idx[:n_train].tolist())
        test_idx.extend(idx[n_train:].tolist())
    train_idx = [train_idx[k] for k in rng.permutation(len(train_idx))]
    test_idx = [test_idx[k] for k in rng.permutation(len(test_idx))]
    return [rows[k] for k in train_idx], [rows[k] for k in test_idx]
