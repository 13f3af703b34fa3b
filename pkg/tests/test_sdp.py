"""Conic interior-point solver: coordinates, LPs, SDPs, certificates."""

import numpy as np
import pytest

from qutritml.errors import DimensionError, PreconditionError
from qutritml.sampler import SeedSpec, make_generator
from qutritml.witness.sdp import (
    smat,
    smat_stack,
    solve_conelp,
    svec,
    svec_stack,
)


def _random_hermitian(rng, d):
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (m + m.conj().T) / 2


def test_svec_is_an_isometry():
    rng = make_generator(SeedSpec(0, 0))
    for d in (2, 3, 9):
        a = _random_hermitian(rng, d)
        b = _random_hermitian(rng, d)
        va, vb = svec(a), svec(b)
        assert va.shape == (d * d,)
        ip_mat = float(np.trace(a @ b).real)
        assert abs(ip_mat - float(va @ vb)) < 1e-10
        assert np.max(np.abs(smat(va, d) - a)) < 1e-12


def test_svec_stack_matches_loop():
    rng = make_generator(SeedSpec(0, 1))
    ms = np.stack([_random_hermitian(rng, 3) for _ in range(5)])
    stacked = svec_stack(ms)
    for k in range(5):
        assert np.max(np.abs(stacked[k] - svec(ms[k]))) < 1e-14
    assert np.max(np.abs(smat_stack(stacked, 3) - ms)) < 1e-14


def test_linear_program():
    # min x1 + 2 x2  s.t. x1 ≥ 1, x2 ≥ 2  (as -x + s = -bound, s ≥ 0)
    c = np.array([1.0, 2.0])
    G = -np.eye(2)
    h = np.array([-1.0, -2.0])
    sol = solve_conelp(c, G, h, l=2, psd_dims=[])
    assert sol.status == "Optimal"
    assert abs(sol.primal_objective - 5.0) < 1e-6
    assert np.max(np.abs(sol.x - [1.0, 2.0])) < 1e-6


def test_psd_smallest_eigenvalue_program():
    # max t s.t. A - t I ⪰ 0 gives the smallest eigenvalue of A
    rng = make_generator(SeedSpec(1, 0))
    a = _random_hermitian(rng, 3)
    w = np.linalg.eigvalsh(a)
    c = np.array([-1.0])  # maximize t
    G = svec(np.eye(3, dtype=complex)).reshape(9, 1)
    h = svec(a)
    sol = solve_conelp(c, G, h, l=0, psd_dims=[3])
    assert sol.status == "Optimal"
    assert abs(sol.x[0] - w[0]) < 1e-6


def test_mixed_cone_problem():
    # min u subject to u ≥ 0 and u I - A ⪰ 0: the largest eigenvalue
    rng = make_generator(SeedSpec(1, 1))
    a = _random_hermitian(rng, 4)
    wmax = float(np.linalg.eigvalsh(a)[-1])
    c = np.array([1.0])
    G = np.vstack([-np.ones((1, 1)), -svec(np.eye(4, dtype=complex)).reshape(16, 1)])
    h = np.concatenate([[0.0], -svec(a)])
    sol = solve_conelp(c, G, h, l=1, psd_dims=[4])
    assert sol.status == "Optimal"
    assert abs(sol.primal_objective - max(wmax, 0.0)) < 1e-6


def test_duality_gap_certificate():
    rng = make_generator(SeedSpec(2, 0))
    a = _random_hermitian(rng, 3)
    G = svec(np.eye(3, dtype=complex)).reshape(9, 1)
    sol = solve_conelp(np.array([-1.0]), G, svec(a), l=0, psd_dims=[3])
    assert sol.status == "Optimal"
    assert sol.rel_gap <= 1e-7
    assert sol.primal_residual <= 1e-8
    assert sol.dual_residual <= 1e-8


def test_primal_infeasible_is_flagged():
    # s1 = -1 - x, s2 = x - 1, both ≥ 0 is impossible
    c = np.array([1.0])
    G = np.array([[1.0], [-1.0]])
    h = np.array([-1.0, -1.0])
    sol = solve_conelp(c, G, h, l=2, psd_dims=[])
    assert sol.status == "PrimalInfeasible"


def test_shape_validation():
    with pytest.raises(DimensionError):
        solve_conelp(np.ones(2), np.ones((3, 2)), np.ones(4), l=3, psd_dims=[])
    with pytest.raises(PreconditionError):
        solve_conelp(np.ones(0), np.ones((1, 0)), np.ones(1), l=1, psd_dims=[])
