"""Tomographic encoding against the SU(3)⊗SU(3) generator basis.

The basis has 80 traceless Hermitian elements in a frozen order:
first the eight Gell-Mann matrices acting on subsystem A (λ_a ⊗ I),
then on B (I ⊗ λ_b), then the 64 pair terms λ_a ⊗ λ_b lexicographic
in (a, b). Feature columns, file formats, and trained models all
depend on this order; changing it is a format version bump.

A state maps to the real vector c_i = tr(E_i ρ) and back through
ρ = I/9 + Σ_i θ_i E_i with θ = G⁻¹ c. The traceless generators carry
no trace information, so the identity component is restored explicitly
in decode; the Gram matrix G is diagonal for this basis (6 for the 16
single-sided elements, 4 for the 64 pair elements).
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, NumericalError

_sq3 = 1.0 / np.sqrt(3.0)


def gell_mann() -> list[np.ndarray]:
    """The eight standard SU(3) generators, tr(λ_a λ_b) = 2δ_ab."""
    lam = np.zeros((8, 3, 3), dtype=complex)
    lam[0, 0, 1] = lam[0, 1, 0] = 1
    lam[1, 0, 1] = -1j
    lam[1, 1, 0] = 1j
    lam[2, 0, 0] = 1
    lam[2, 1, 1] = -1
    lam[3, 0, 2] = lam[3, 2, 0] = 1
    lam[4, 0, 2] = -1j
    lam[4, 2, 0] = 1j
    lam[5, 1, 2] = lam[5, 2, 1] = 1
    lam[6, 1, 2] = -1j
    lam[6, 2, 1] = 1j
    lam[7, 0, 0] = lam[7, 1, 1] = _sq3
    lam[7, 2, 2] = -2 * _sq3
    return [lam[a].copy() for a in range(8)]


_basis_stack: np.ndarray | None = None
_gram_diag: np.ndarray | None = None


def build_basis() -> list[np.ndarray]:
    """The 80 generators in the frozen order described above."""
    return [e.copy() for e in _stack()]


def _stack() -> np.ndarray:
    """Cached (80, 9, 9) array of the basis elements."""
    global _basis_stack
    if _basis_stack is None:
        lam = gell_mann()
        eye = np.eye(3, dtype=complex)
        elems = [np.kron(l, eye) for l in lam]
        elems += [np.kron(eye, l) for l in lam]
        elems += [np.kron(la, lb) for la in lam for lb in lam]
        _basis_stack = np.stack(elems)
        _basis_stack.setflags(write=False)
    return _basis_stack


def gram() -> np.ndarray:
    """G_ij = tr(E_i E_j); diagonal with entries 6 (single-sided) and 4 (pairs)."""
    e = _stack()
    return np.einsum("kij,lji->kl", e, e).real


def _gram_inv_diag() -> np.ndarray:
    global _gram_diag
    if _gram_diag is None:
        _gram_diag = np.einsum("kij,kji->k", _stack(), _stack()).real
        _gram_diag.setflags(write=False)
    return _gram_diag


def encode(rho: np.ndarray) -> np.ndarray:
    """Expectation vector c_i = tr(E_i ρ) ∈ ℝ⁸⁰."""
    if rho.shape != (9, 9):
        raise DimensionError(f"encode expects a 9x9 state, got {rho.shape}")
    c = np.einsum("kij,ji->k", _stack(), rho)
    resid = float(np.max(np.abs(c.imag)))
    if resid > 1e-9:
        raise NumericalError(f"imaginary residue {resid:.3e} in expectation values; input not Hermitian")
    return c.real.copy()


def decode(c: np.ndarray) -> np.ndarray:
    """Inverse map ρ = I/9 + Σ θ_i E_i, θ = G⁻¹c. PSD is not enforced."""
    v = np.asarray(c, dtype=float).reshape(-1)
    if v.shape != (80,):
        raise DimensionError(f"decode expects 80 coefficients, got {v.shape}")
    theta = v / _gram_inv_diag()
    return np.eye(9, dtype=complex) / 9 + np.einsum("k,kij->ij", theta, _stack())


def repair_to_state(m: np.ndarray) -> np.ndarray:
    """Clamp negative eigenvalues and renormalize to a valid state."""
    h = (m + m.conj().T) / 2
    w, vmat = np.linalg.eigh(h)
    w = np.maximum(w, 0.0)
    s = w.sum()
    if s <= 0:
        raise NumericalError("matrix has no positive spectral mass to renormalize")
    return (vmat * (w / s)) @ vmat.conj().T
