"""Deterministic random state generation.

Reproducibility contract: every draw is a pure function of a
``SeedSpec`` (master seed, stream index). Streams use the counter-based
Philox generator keyed directly by the pair, so stream N can be opened
without generating streams 0..N-1 first; that is what makes parallel
dataset generation order-independent.

Gaussians are produced by Box-Muller on the uniform stream instead of
the generator's own normal() so the byte-level output is pinned by this
module, not by the numpy version.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError

_U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class SeedSpec:
    """Key of one reproducible random stream."""

    master_seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        for name in ("master_seed", "stream_index"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) <= _U64_MAX:
                raise PreconditionError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def stream(self, index: int) -> "SeedSpec":
        """Same master seed, different stream."""
        return SeedSpec(self.master_seed, index)


def make_generator(seed: SeedSpec) -> np.random.Generator:
    key = np.array([seed.master_seed, seed.stream_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def gauss(rng: np.random.Generator, n: int) -> np.ndarray:
    """n standard normals via Box-Muller on rng's uniform stream."""
    m = (n + 1) // 2
    u1 = rng.random(m)
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log1p(-u1))  # 1-u1 ∈ (0,1], no log(0)
    ang = 2.0 * np.pi * u2
    out = np.empty(2 * m)
    out[0::2] = r * np.cos(ang)
    out[1::2] = r * np.sin(ang)
    return out[:n]


def complex_gauss(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Array of X + iY with X, Y independent standard normals."""
    n = int(np.prod(shape))
    z = gauss(rng, 2 * n)
    return (z[:n] + 1j * z[n:]).reshape(shape)


def ginibre(rng: np.random.Generator, dim: int) -> np.ndarray:
    return complex_gauss(rng, (dim, dim))


def haar_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unit vector: normalized complex Gaussian."""
    v = complex_gauss(rng, (dim,))
    return v / np.linalg.norm(v)


def product_vector(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Independent Haar qutrit pair (|a⟩, |b⟩)."""
    return haar_vector(rng, 3), haar_vector(rng, 3)


def simplex_weights(rng: np.random.Generator, k: int) -> np.ndarray:
    """Uniform (flat Dirichlet) weights on the k-simplex."""
    if k == 1:
        rng.random(1)  # keep stream advance uniform across k
        return np.ones(1)
    e = -np.log1p(-rng.random(k))
    return e / e.sum()


def random_density_hs(dim: int, seed: SeedSpec) -> np.ndarray:
    """Hilbert-Schmidt random state: GG†/tr(GG†) for Ginibre G."""
    if dim < 2:
        raise PreconditionError(f"dim must be ≥ 2, got {dim}")
    g = ginibre(make_generator(seed), dim)
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_pure(dim: int, seed: SeedSpec) -> np.ndarray:
    """Haar-random unit amplitude vector."""
    if dim < 2:
        raise PreconditionError(f"dim must be ≥ 2, got {dim}")
    return haar_vector(make_generator(seed), dim)


def random_product_state(seed: SeedSpec) -> np.ndarray:
    """|a⟩⟨a| ⊗ |b⟩⟨b| with independent Haar qutrit factors."""
    a, b = product_vector(make_generator(seed))
    ab = np.kron(a, b)
    return np.outer(ab, ab.conj())


def random_separable_mixture(k: int, seed: SeedSpec) -> np.ndarray:
    """Convex mixture of k Haar product projectors, flat simplex weights."""
    if k < 1:
        raise PreconditionError(f"k must be ≥ 1, got {k}")
    rng = make_generator(seed)
    p = simplex_weights(rng, k)
    rho = np.zeros((9, 9), dtype=complex)
    for i in range(k):
        a, b = product_vector(rng)
        ab = np.kron(a, b)
        rho += p[i] * np.outer(ab, ab.conj())
    return rho
