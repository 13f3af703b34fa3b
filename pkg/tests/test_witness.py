"""Witness-module checks: both robustness routes, edges, and duality."""

import numpy as np
import pytest

from qutritml.qmat import (
    is_ppt,
    maximally_entangled,
    maximally_mixed,
    min_pt_eigenvalue,
    validate_density_matrix,
)
from qutritml.sampler import (
    SeedSpec,
    random_density_hs,
    random_pure,
    random_separable_mixture,
)
from qutritml.witness import (
    DEFAULT_EPSILON,
    edge_states_distinct,
    gr_decomposable,
    gr_eps_oew,
)
from qutritml.witness.gr import solve_master
from qutritml.witness.seesaw import ProductPoint, computational_points


def pure_correlated(schmidt):
    """Density matrix of sum_i s_i |ii> for a given Schmidt vector."""
    s = np.asarray(schmidt, dtype=float)
    psi = np.zeros(9, dtype=complex)
    for i, si in enumerate(s):
        psi[i * 3 + i] = si
    return np.outer(psi, psi.conj())


def rel_gap(report):
    return abs(report.primal_value - report.dual_value) / (
        1.0 + abs(report.primal_value))


@pytest.fixture(scope="module")
def npt_cases():
    """Three NPT draws with both robustness routes solved once."""
    cases = []
    idx = 0
    while len(cases) < 3:
        rho = random_density_hs(9, SeedSpec(300, idx))
        idx += 1
        if is_ppt(rho):
            continue
        eps_res = gr_eps_oew(rho, DEFAULT_EPSILON, seed=SeedSpec(301, idx))
        dec_res = gr_decomposable(rho)
        cases.append((rho, eps_res, dec_res))
    return cases


class TestKnownValues:
    def test_maximally_entangled_both_routes(self):
        rho = maximally_entangled(3)
        eps_res = gr_eps_oew(rho, DEFAULT_EPSILON, seed=SeedSpec(310, 0))
        dec_res = gr_decomposable(rho)
        assert eps_res.report.optimal and dec_res.report.optimal
        assert eps_res.gr == pytest.approx(2.0, abs=1e-3)
        assert dec_res.gr == pytest.approx(2.0, abs=1e-3)

    def test_skewed_pure_state_closed_form(self):
        # for sum_i s_i |ii> the robustness is (sum_i s_i)^2 - 1
        s = np.array([0.8, 0.5, np.sqrt(1.0 - 0.64 - 0.25)])
        oracle = float(np.sum(s)) ** 2 - 1.0
        rho = pure_correlated(s)
        eps_res = gr_eps_oew(rho, DEFAULT_EPSILON, seed=SeedSpec(311, 0))
        dec_res = gr_decomposable(rho)
        assert eps_res.gr == pytest.approx(oracle, abs=2e-3)
        assert dec_res.gr == pytest.approx(oracle, abs=2e-3)

    def test_separable_mixtures_have_tiny_gr(self):
        for i, k in enumerate((13, 16, 20)):
            sigma = random_separable_mixture(k, SeedSpec(312, i))
            res = gr_eps_oew(sigma, DEFAULT_EPSILON, seed=SeedSpec(313, i))
            assert res.report.optimal
            assert res.gr <= DEFAULT_EPSILON

    def test_decomposable_is_zero_on_ppt_states(self):
        sigma = random_separable_mixture(12, SeedSpec(314, 0))
        res = gr_decomposable(sigma)
        assert res.report.optimal
        assert res.gr <= 1e-7


class TestResultGeometry:
    def test_edge_reconstruction(self, npt_cases):
        for rho, eps_res, dec_res in npt_cases:
            for res in (eps_res, dec_res):
                recon = (rho + res.gr * res.sigma) / (1.0 + res.gr)
                assert np.max(np.abs(recon - res.edge)) < 1e-8
                validate_density_matrix(res.sigma, "sigma")

    def test_routes_are_ordered(self, npt_cases):
        # the decomposable route relaxes the separability constraint,
        # so its optimum can only be smaller
        for _, eps_res, dec_res in npt_cases:
            assert dec_res.gr <= eps_res.gr + 1e-5

    def test_ppt_edge_sits_on_the_boundary(self, npt_cases):
        for _, _, dec_res in npt_cases:
            lam = min_pt_eigenvalue(dec_res.edge)
            assert -1e-6 <= lam <= 1e-6

    def test_separable_edge_is_explicit_mixture(self, npt_cases):
        for _, eps_res, _ in npt_cases:
            assert eps_res.points is not None
            w = eps_res.weights
            assert np.all(w >= -1e-12)
            assert np.sum(w) / (1.0 + eps_res.gr) == pytest.approx(1.0, abs=1e-9)
            mix = sum(wk * p.projector for wk, p in zip(w, eps_res.points))
            mix = mix / (1.0 + eps_res.gr)
            assert np.max(np.abs(mix - eps_res.edge)) < 1e-7

    def test_optimal_reports_have_tight_gaps(self, npt_cases):
        for _, eps_res, dec_res in npt_cases:
            assert rel_gap(eps_res.report) <= 1e-7
            assert rel_gap(dec_res.report) <= 1e-7

    def test_mixing_toward_identity_shrinks_gr(self, npt_cases):
        rho = npt_cases[0][0]
        tau = maximally_mixed()
        base = gr_decomposable(rho).gr
        prev = base
        for t in (0.1, 0.2, 0.3, 0.4):
            val = gr_decomposable((1.0 - t) * rho + t * tau).gr
            assert val <= prev + 1e-7
            assert val <= (1.0 - t) * base + 1e-7
            prev = val


class TestMasterProblem:
    def test_duality_and_feasibility_on_random_instances(self):
        for i in range(20):
            rho = random_density_hs(9, SeedSpec(320, i))
            points = list(computational_points())
            for j in range(6):
                a = random_pure(3, SeedSpec(321, i * 16 + 2 * j))
                b = random_pure(3, SeedSpec(321, i * 16 + 2 * j + 1))
                points.append(ProductPoint.from_vectors(a, b))
            q, witness, report = solve_master(points, rho)
            assert report.optimal
            assert rel_gap(report) <= 1e-7
            assert np.all(q >= -1e-10)
            for p in points:
                overlap = np.trace(witness @ p.projector).real
                assert overlap <= 1.0 + 1e-8
            cover = sum(qk * p.projector for qk, p in zip(q, points))
            assert np.min(np.linalg.eigvalsh(cover - rho)) >= -1e-7


class TestControlFlow:
    def test_iteration_cap_is_reported(self):
        rho = maximally_entangled(3)
        res = gr_eps_oew(rho, DEFAULT_EPSILON, seed=SeedSpec(322, 0),
                         max_outer=1, restarts=2, certify_restarts=2,
                         init_random_points=5)
        assert res.report.status == "IterationCap"

    def test_edge_distinctness_threshold(self):
        rho = maximally_entangled(3)
        assert not edge_states_distinct(rho, rho)
        assert edge_states_distinct(rho, maximally_mixed())
