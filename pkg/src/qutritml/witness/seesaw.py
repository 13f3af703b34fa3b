"""See-saw maximization of ⟨ab|W|ab⟩ over product vectors.

The bilinear form is non-convex jointly but an eigenproblem in each
factor: for fixed |b⟩ the optimal |a⟩ is the top eigenvector of the
3×3 contraction (I⊗⟨b|)W(I⊗|b⟩), and symmetrically. Alternating the
two updates is monotone, so each restart converges to a local maximum;
many random restarts make missing the global one unlikely. Restarts
run batched: all current |a⟩, |b⟩ vectors advance together through
stacked 3×3 eigendecompositions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, PreconditionError
from ..qmat import require_hermitian
from ..sampler import SeedSpec, complex_gauss, make_generator


@dataclass(frozen=True, eq=False)
class ProductPoint:
    """A product vector |a⟩⊗|b⟩ with its projector cached."""

    a: np.ndarray
    b: np.ndarray
    projector: np.ndarray

    @classmethod
    def from_vectors(cls, a: np.ndarray, b: np.ndarray) -> "ProductPoint":
        a = np.asarray(a, dtype=complex).reshape(-1)
        b = np.asarray(b, dtype=complex).reshape(-1)
        if a.shape != (3,) or b.shape != (3,):
            raise DimensionError(f"product point needs two qutrit vectors, got {a.shape}, {b.shape}")
        a = a / np.linalg.norm(a)
        b = b / np.linalg.norm(b)
        ab = np.kron(a, b)
        return cls(a=a, b=b, projector=np.outer(ab, ab.conj()))

    def vector(self) -> np.ndarray:
        return np.kron(self.a, self.b)


def computational_points() -> list[ProductPoint]:
    """The nine |i⟩|j⟩ basis points."""
    eye = np.eye(3, dtype=complex)
    return [ProductPoint.from_vectors(eye[i], eye[j]) for i in range(3) for j in range(3)]


def _normalize_rows(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def seesaw_batch(
    w: np.ndarray,
    restarts: int,
    rng: np.random.Generator,
    tol: float = 1e-10,
    max_sweeps: int = 500,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All local maxima found from `restarts` random starts.

    Returns (A, B, values): (R,3) factor stacks and the R achieved values,
    unsorted. The rng is advanced by exactly 6*restarts normal draws.
    """
    if restarts < 1:
        raise PreconditionError(f"restarts must be ≥ 1, got {restarts}")
    wt = np.asarray(w, dtype=complex).reshape(3, 3, 3, 3)
    a_vecs = _normalize_rows(complex_gauss(rng, (restarts, 3)))
    b_vecs = _normalize_rows(complex_gauss(rng, (restarts, 3)))
    vals = np.full(restarts, -np.inf)
    for _ in range(max_sweeps):
        # |a⟩ ← top eigenvector of (I⊗⟨b|)W(I⊗|b⟩), then symmetrically
        ma = np.einsum("rk,ikjl,rl->rij", b_vecs.conj(), wt, b_vecs)
        _, vecs = np.linalg.eigh((ma + ma.conj().transpose(0, 2, 1)) / 2)
        a_vecs = vecs[:, :, -1]
        mb = np.einsum("ri,ikjl,rj->rkl", a_vecs.conj(), wt, a_vecs)
        _, vecs = np.linalg.eigh((mb + mb.conj().transpose(0, 2, 1)) / 2)
        b_vecs = vecs[:, :, -1]
        new_vals = np.einsum("rk,rkl,rl->r", b_vecs.conj(), mb, b_vecs).real
        if np.max(new_vals - vals) < tol:
            vals = new_vals
            break
        vals = new_vals
    return a_vecs, b_vecs, vals


def seesaw_max_product(
    w: np.ndarray,
    restarts: int,
    seed: SeedSpec,
) -> tuple[ProductPoint, float]:
    """Best product point over `restarts` see-saw runs."""
    if w.shape != (9, 9):
        raise DimensionError(f"expected a 9x9 operator, got {w.shape}")
    require_hermitian(w, what="witness")
    a_vecs, b_vecs, vals = seesaw_batch(w, restarts, make_generator(seed))
    best = int(np.argmax(vals))
    point = ProductPoint.from_vectors(a_vecs[best], b_vecs[best])
    value = float(np.real(point.vector().conj() @ w @ point.vector()))
    return point, value


def top_distinct_points(
    a_vecs: np.ndarray,
    b_vecs: np.ndarray,
    vals: np.ndarray,
    k: int,
    min_value: float = -np.inf,
    overlap_tol: float = 1e-6,
) -> tuple[list[ProductPoint], list[float]]:
    """Up to k best points above min_value, deduplicated by state overlap.

    Two points count as the same local maximum when their product
    projectors overlap within overlap_tol of 1.
    """
    order = np.argsort(vals)[::-1]
    points: list[ProductPoint] = []
    values: list[float] = []
    for idx in order:
        if len(points) == k or vals[idx] <= min_value:
            break
        cand_a, cand_b = a_vecs[idx], b_vecs[idx]
        dup = False
        for p in points:
            overlap = abs(np.vdot(p.a, cand_a)) ** 2 * abs(np.vdot(p.b, cand_b)) ** 2
            if overlap > 1 - overlap_tol:
                dup = True
                break
        if not dup:
            points.append(ProductPoint.from_vectors(cand_a, cand_b))
            values.append(float(vals[idx]))
    return points, values
