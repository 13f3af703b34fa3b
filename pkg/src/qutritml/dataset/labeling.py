"""Entanglement-class labeling for two-qutrit states.

A state is SEP, PPTES, or NPT: the partial-transpose test splits NPT
from PPT, and a witness optimization splits the PPT states into
separable ones (gr <= epsilon) and bound entangled ones (gr > epsilon).
Labeling never emits a state whose witness run did not certify.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError, PreconditionError, SolverError
from ..qmat import (
    PPT_TOL,
    hermitize,
    is_ppt,
    maximally_mixed,
    min_pt_eigenvalue,
    validate_density_matrix,
)
from ..sampler import SeedSpec
from ..witness import DEFAULT_EPSILON, edge_states_distinct, gr_decomposable, gr_eps_oew

LABELS = ("SEP", "PPTES", "NPT")
ORIGIN_RANDOM = "Random"
ORIGIN_ARTIFICIAL = "ArtificialPptes"


@dataclass(frozen=True)
class LabeledState:
    """A density matrix with its class, robustness value and provenance."""

    rho: np.ndarray
    label: str
    gr: float
    origin: str
    seed_trace: SeedSpec


def label_random_state(
    rho: np.ndarray,
    epsilon: float = DEFAULT_EPSILON,
    seed: SeedSpec = SeedSpec(0, 0),
    seed_trace: SeedSpec | None = None,
) -> LabeledState:
    """Label one state as SEP, PPTES, or NPT, recording its robustness.

    Raises SolverError when the witness run does not end Optimal and
    NumericalError when the result contradicts the partial-transpose
    test; callers generating datasets treat both as rejections.
    """
    validate_density_matrix(rho, "rho")
    ppt = is_ppt(rho)
    # PPT draws can sit arbitrarily close to the separable boundary, and
    # deciding gr against epsilon there takes a deep column-generation run
    result = gr_eps_oew(rho, epsilon, seed=seed, max_outer=1500)
    if result.report.status != "Optimal":
        raise SolverError(
            f"witness optimization ended {result.report.status}; state not labeled")
    if not ppt:
        if result.gr <= epsilon:
            raise NumericalError(
                f"NPT state returned gr={result.gr:.3e} <= epsilon={epsilon:.3e}")
        label = "NPT"
    else:
        label = "PPTES" if result.gr > epsilon else "SEP"
    return LabeledState(
        rho=rho, label=label, gr=result.gr, origin=ORIGIN_RANDOM,
        seed_trace=seed_trace if seed_trace is not None else seed)


def make_artificial_pptes(
    rho_npt: np.ndarray,
    epsilon: float = DEFAULT_EPSILON,
    seed: SeedSpec = SeedSpec(0, 0),
    recert_seed: SeedSpec | None = None,
    seed_trace: SeedSpec | None = None,
    reject_log: list[str] | None = None,
) -> LabeledState | None:
    """Build a bound entangled state from an NPT one, or None with a logged reason.

    The separable edge of the witness run and the PPT edge of the
    decomposable run are mixed half and half; the mixture is PPT by
    convexity, and a fresh witness run must still certify gr > epsilon
    for it to count as PPTES.
    """
    validate_density_matrix(rho_npt, "rho_npt")
    if is_ppt(rho_npt):
        raise PreconditionError("rho_npt must be NPT")

    def _log(reason: str) -> None:
        if reject_log is not None:
            reject_log.append(reason)

    eps_res = gr_eps_oew(rho_npt, epsilon, seed=seed, max_outer=1500)
    if eps_res.report.status != "Optimal":
        _log(f"separable-edge run ended {eps_res.report.status}")
        return None
    dec_res = gr_decomposable(rho_npt)
    if dec_res.report.status != "Optimal":
        _log(f"ppt-edge run ended {dec_res.report.status}")
        return None

    xi_sep = eps_res.edge
    xi_ppt = dec_res.edge
    if not edge_states_distinct(xi_sep, xi_ppt):
        _log("edge states coincide in trace norm")
        return None

    delta = hermitize(0.5 * xi_ppt + 0.5 * xi_sep)
    delta = delta / float(np.trace(delta).real)
    # both edges are PPT only up to solver tolerance; if the mixture's
    # partial transpose dips below the test tolerance, absorb the dip
    # with an infinitesimal dose of the maximally mixed state
    lam = min_pt_eigenvalue(delta)
    if lam < PPT_TOL:
        t = (abs(lam) + 1e-11) / (abs(lam) + 1.0 / 9.0)
        delta = hermitize((1.0 - t) * delta + t * maximally_mixed())
        if not is_ppt(delta):
            _log("edge mixture not PPT within tolerance")
            return None
    try:
        validate_density_matrix(delta, "delta")
    except PreconditionError as exc:
        _log(f"edge mixture invalid: {exc}")
        return None

    if recert_seed is None:
        recert_seed = SeedSpec(seed.master_seed, seed.stream_index + 1)
    # delta sits near the separable boundary, so certifying gr to the
    # epsilon scale needs a deep run; warm-starting from the separable
    # edge's mixture support covers half of delta from the first master
    recert = gr_eps_oew(delta, epsilon, seed=recert_seed,
                        max_outer=1500, init_points=eps_res.points)
    if recert.report.status != "Optimal":
        _log(f"re-certification ended {recert.report.status}")
        return None
    if recert.gr <= epsilon:
        _log(f"re-certification gr={recert.gr:.3e} <= epsilon")
        return None
    return LabeledState(
        rho=delta, label="PPTES", gr=recert.gr, origin=ORIGIN_ARTIFICIAL,
        seed_trace=seed_trace if seed_trace is not None else seed)
