"""Tomographic basis: orthogonality, encode/decode roundtrip, repair."""

import numpy as np
import pytest

from qutritml.errors import DimensionError, NumericalError
from qutritml.qmat import hermitize, maximally_mixed
from qutritml.sampler import SeedSpec, random_density_hs
from qutritml.tomo import build_basis, decode, encode, gell_mann, gram, repair_to_state


def test_gell_mann_properties():
    lam = gell_mann()
    assert len(lam) == 8
    for a, m in enumerate(lam):
        assert np.max(np.abs(m - m.conj().T)) < 1e-15
        assert abs(np.trace(m)) < 1e-15
        for b, m2 in enumerate(lam):
            t = np.trace(m @ m2).real
            assert abs(t - (2.0 if a == b else 0.0)) < 1e-14


def test_basis_order_and_count():
    basis = build_basis()
    assert len(basis) == 80
    lam = gell_mann()
    eye = np.eye(3, dtype=complex)
    assert np.allclose(basis[0], np.kron(lam[0], eye))
    assert np.allclose(basis[8], np.kron(eye, lam[0]))
    assert np.allclose(basis[16], np.kron(lam[0], lam[0]))
    assert np.allclose(basis[16 + 8 * 2 + 3], np.kron(lam[2], lam[3]))


def test_gram_is_expected_diagonal():
    g = gram()
    off = g - np.diag(np.diag(g))
    assert np.max(np.abs(off)) < 1e-12
    d = np.diag(g)
    assert np.allclose(d[:16], 6.0, atol=1e-12)
    assert np.allclose(d[16:], 4.0, atol=1e-12)


def test_encode_shapes_and_identity():
    c = encode(maximally_mixed())
    assert c.shape == (80,)
    assert np.max(np.abs(c)) < 1e-14  # traceless basis on I/9
    with pytest.raises(DimensionError):
        encode(np.eye(3, dtype=complex) / 3)


def test_roundtrip_on_random_states():
    for i in range(20):
        rho = random_density_hs(9, SeedSpec(6, i))
        back = decode(encode(rho))
        assert np.max(np.abs(back - rho)) < 1e-12


def test_decode_validates_length():
    with pytest.raises(DimensionError):
        decode(np.zeros(79))


def test_encode_rejects_non_hermitian():
    m = np.zeros((9, 9), dtype=complex)
    m[0, 1] = 1.0  # strictly upper, not Hermitian
    with pytest.raises(NumericalError):
        encode(m)


def test_repair_to_state_clamps_and_renormalizes():
    rho = random_density_hs(9, SeedSpec(6, 99))
    dirty = hermitize(rho - 0.02 * np.eye(9))
    fixed = repair_to_state(dirty)
    w = np.linalg.eigvalsh(fixed)
    assert w[0] >= -1e-15
    assert abs(np.trace(fixed).real - 1.0) < 1e-12
    with pytest.raises(NumericalError):
        repair_to_state(-np.eye(9, dtype=complex))
