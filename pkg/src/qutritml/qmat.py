"""Dense complex linear algebra for small Hermitian operators.

Everything here works on plain ``numpy`` complex arrays. States of two
qutrits are 9x9 density matrices; local factors are 3x3. Eigenproblems
are delegated to LAPACK (``numpy.linalg.eigh``), which is exact enough
at these sizes that all tolerance contracts below hold with wide margin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, PreconditionError, SolverError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_FLOOR = -1e-10
PPT_TOL = 1e-10


def hermitize(m: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (M + M†)/2."""
    return (m + m.conj().T) / 2


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def require_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL, what: str = "matrix") -> None:
    dev = float(np.max(np.abs(m - m.conj().T)))
    if dev > tol:
        raise PreconditionError(f"{what} is not Hermitian: max|M - M†| = {dev:.3e} > {tol:.0e}")


def validate_density_matrix(rho: np.ndarray, what: str = "state") -> None:
    """Check the density-matrix invariants: Hermitian, unit trace, PSD floor."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"{what} must be a square matrix, got shape {rho.shape}")
    require_hermitian(rho, what=what)
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > TRACE_TOL:
        raise PreconditionError(f"{what} has trace {tr}, expected 1 within {TRACE_TOL:.0e}")
    lo = float(np.linalg.eigvalsh(hermitize(rho))[0])
    if lo < PSD_FLOOR:
        raise PreconditionError(f"{what} has eigenvalue {lo:.3e} below the PSD floor {PSD_FLOOR:.0e}")


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # unitary, columns aligned with eigenvalues


def eig_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> Spectrum:
    """Eigendecompose a Hermitian matrix.

    Raises ``PreconditionError`` on non-Hermitian input and ``SolverError``
    if LAPACK fails to converge.
    """
    require_hermitian(m, tol=tol)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"Hermitian eigensolver did not converge: {exc}") from exc
    return Spectrum(eigenvalues=w, eigenvectors=v)


def partial_transpose(rho: np.ndarray, subsystem: str = "B") -> np.ndarray:
    """Transpose one tensor factor of a 9x9 operator on C^3 ⊗ C^3.

    With entries indexed as M[(i,k),(j,l)] = M[3i+k, 3j+l], transposing B
    maps ((i,k),(j,l)) -> ((i,l),(j,k)); transposing A maps it to
    ((j,k),(i,l)). The map is a pure entry permutation: trace-preserving,
    Hermiticity-preserving, and an exact involution.
    """
    if rho.shape != (9, 9):
        raise DimensionError(f"partial transpose is defined for 9x9 operators, got {rho.shape}")
    t = rho.reshape(3, 3, 3, 3)
    if subsystem == "B":
        out = t.transpose(0, 3, 2, 1)
    elif subsystem == "A":
        out = t.transpose(2, 1, 0, 3)
    else:
        raise PreconditionError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return np.ascontiguousarray(out.reshape(9, 9))


def min_pt_eigenvalue(rho: np.ndarray, subsystem: str = "B") -> float:
    """Smallest eigenvalue of the partial transpose."""
    pt = partial_transpose(rho, subsystem)
    return float(np.linalg.eigvalsh(hermitize(pt))[0])


def is_ppt(rho: np.ndarray, tol: float = PPT_TOL) -> bool:
    """Peres-Horodecki test: does the partial transpose stay PSD (up to tol)?"""
    if tol < 0:
        raise PreconditionError("tolerance must be nonnegative")
    return min_pt_eigenvalue(rho) >= -tol


def trace_norm(m: np.ndarray) -> float:
    """Trace norm of a Hermitian matrix: sum of absolute eigenvalues."""
    require_hermitian(m)
    return float(np.sum(np.abs(np.linalg.eigvalsh(m))))


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    """Square root of a PSD Hermitian matrix, clamping eigenvalues below 0."""
    w, v = np.linalg.eigh(hermitize(m))
    w = np.sqrt(np.maximum(w, 0.0))
    return (v * w) @ v.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray,
             sqrt_rho: np.ndarray | None = None) -> float:
    """Uhlmann fidelity F(ρ,σ) = [tr sqrt(sqrt(ρ) σ sqrt(ρ))]².

    Pass sqrt_rho to reuse a precomputed matrix square root of rho
    across many pairings with the same first argument.
    """
    if rho.shape != sigma.shape:
        raise DimensionError(f"fidelity needs equal dims, got {rho.shape} vs {sigma.shape}")
    require_hermitian(rho, what="rho")
    require_hermitian(sigma, what="sigma")
    r = sqrt_rho if sqrt_rho is not None else sqrtm_psd(rho)
    inner = hermitize(r @ sigma @ r)
    w = np.linalg.eigvalsh(inner)
    # sqrt turns noise-level eigenvalues (~1e-16) into 1e-8 terms; zero them
    floor = max(float(w[-1]), 0.0) * 1e-13
    w = np.where(w > floor, w, 0.0)
    return float(np.sum(np.sqrt(w)) ** 2)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product."""
    return np.kron(a, b)


def projector(psi: np.ndarray) -> np.ndarray:
    """Rank-one projector |ψ⟩⟨ψ| from an amplitude vector."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def maximally_entangled(d: int = 3) -> np.ndarray:
    """Projector onto (|00⟩ + ... + |d-1,d-1⟩)/√d in C^d ⊗ C^d."""
    psi = np.zeros(d * d, dtype=complex)
    for i in range(d):
        psi[i * d + i] = 1.0 / np.sqrt(d)
    return projector(psi)


def maximally_mixed(dim: int = 9) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def horodecki_state(a: float) -> np.ndarray:
    """The one-parameter 3x3 family of PPT entangled states, a ∈ (0,1)."""
    if not 0.0 < a < 1.0:
        raise PreconditionError(f"parameter must lie in (0,1), got {a}")
    m = np.zeros((9, 9), dtype=complex)
    for i in (0, 4, 8):
        for j in (0, 4, 8):
            m[i, j] = a
    for i in (1, 2, 3, 5, 7):
        m[i, i] = a
    b = (1.0 + a) / 2.0
    c = np.sqrt(1.0 - a * a) / 2.0
    m[6, 6] = b
    m[8, 8] = b
    m[6, 8] = c
    m[8, 6] = c
    return m / (8.0 * a + 1.0)
