"""Generalized robustness of entanglement.

GR(ρ) is the least s ≥ 0 such that (ρ + s·σ)/(1 + s) is separable for
some state σ. Two routes are implemented:

``gr_eps_oew``
    Separability-relative GR by column generation. The master SDP
    minimizes Σq − 1 over nonnegative weights q on a working set of
    product projectors π_k subject to Σ q_k π_k ⪰ ρ; its dual variable
    is a witness W with tr(Wπ_k) ≤ 1 and tr(Wρ) = 1 + gr. A see-saw
    search then hunts for product states violating ⟨ab|W|ab⟩ ≤ 1; found
    violations join the working set, and the loop ends when a
    high-restart certification pass finds none. At that point the
    working-set bound and the witness bound pinch, so gr is certified
    up to the see-saw's reach. Entanglement verdicts compare gr against
    a tolerance epsilon.

``gr_decomposable``
    PPT-relative GR by a single SDP: minimize tr(S) over S ⪰ 0 with
    (ρ + S)ᴳ ⪰ 0. Its edge state (ρ+S)/(1+trS) sits on the PPT
    boundary, and the dual supplies a witness W with I − W = Qᴳ,
    Q ⪰ 0. Because separable states are PPT, this value never exceeds
    the separability-relative one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError, SolverError
from ..qmat import hermitize, partial_transpose, trace_norm, validate_density_matrix
from ..sampler import SeedSpec, make_generator, product_vector
from .sdp import ConeLPSolution, smat, solve_conelp, svec, svec_stack
from .seesaw import ProductPoint, computational_points, seesaw_batch, top_distinct_points

DEFAULT_EPSILON = 1e-5
_GR_ZERO = 1e-9  # below this the minimizer is non-unique; use the fixed convention


@dataclass(frozen=True)
class SdpReport:
    """Solve certificate of one SDP: objective pair, effort, outcome."""

    primal_value: float
    dual_value: float
    iterations: int
    status: str  # Optimal | IterationCap | NumericalTrouble

    @property
    def optimal(self) -> bool:
        return self.status == "Optimal"


@dataclass(frozen=True, eq=False)
class GrResult:
    """Robustness value with its optimizers and dual certificate.

    ``edge`` always reconstructs as (rho + gr·sigma)/(1 + gr). For the
    separability-relative route, ``points`` and ``weights`` spell out
    the separable edge state as the explicit mixture
    Σ weights_k/(1+gr) · points_k.projector.
    """

    gr: float
    sigma: np.ndarray
    edge: np.ndarray
    witness: np.ndarray
    report: SdpReport
    points: tuple[ProductPoint, ...] | None = None
    weights: np.ndarray | None = None


def _report_from(sol: ConeLPSolution) -> SdpReport:
    status = "NumericalTrouble" if sol.status == "PrimalInfeasible" else sol.status
    return SdpReport(
        primal_value=sol.primal_objective,
        dual_value=sol.dual_objective,
        iterations=sol.iterations,
        status=status,
    )


def edge_states_distinct(a: np.ndarray, b: np.ndarray, threshold: float = 1e-3) -> bool:
    """True iff the half trace-norm distance strictly exceeds the threshold."""
    if a.shape != b.shape:
        raise PreconditionError(f"edge states differ in shape: {a.shape} vs {b.shape}")
    return 0.5 * trace_norm(hermitize(a - b)) > threshold


def _support_basis(points: list[ProductPoint], rho: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span{product vectors} + supp(ρ), as columns."""
    cols = [p.vector() for p in points]
    w, v = np.linalg.eigh(hermitize(rho))
    cols.extend(v[:, k] for k in range(9) if w[k] > 1e-12)
    stack = np.column_stack(cols)
    u, s, _ = np.linalg.svd(stack, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * s[0]))
    return u[:, :rank]


def solve_master(
    points: list[ProductPoint],
    rho: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, SdpReport]:
    """Min Σq s.t. q ≥ 0, Σ q_k π_k ⪰ ρ; returns (q, dual witness W, report).

    The PSD constraint is restricted to the joint support of the
    working set and ρ, which keeps the cone block strictly feasible
    even when the working set spans only part of the space.
    """
    if not points:
        raise PreconditionError("working set must be non-empty")
    validate_density_matrix(rho, "rho")
    basis = _support_basis(points, rho)
    u = basis.shape[1]
    k = len(points)
    vecs = np.stack([basis.conj().T @ p.vector() for p in points])  # (k, u)
    pi_u = np.einsum("ka,kb->kab", vecs, vecs.conj())
    rho_u = basis.conj().T @ rho @ basis

    c = np.ones(k)
    g = np.zeros((k + u * u, k))
    g[:k, :k] = -np.eye(k)
    g[k:, :] = -svec_stack(pi_u).T
    h = np.concatenate([np.zeros(k), -svec(hermitize(rho_u))])
    sol = solve_conelp(c, g, h, l=k, psd_dims=[u])
    if sol.status == "PrimalInfeasible":
        raise SolverError(
            "master problem infeasible: working set cannot dominate the state")
    q = np.maximum(sol.x, 0.0)
    w_u = hermitize(smat(sol.z[k:], u))
    witness = basis @ w_u @ basis.conj().T
    return q, witness, _report_from(sol)


def _mixture(points: list[ProductPoint], q: np.ndarray) -> np.ndarray:
    out = np.zeros((9, 9), dtype=complex)
    for qk, p in zip(q, points):
        out += qk * p.projector
    return out


def _zero_gr_result(rho: np.ndarray, gr: float, witness: np.ndarray, report: SdpReport,
                    points: list[ProductPoint] | None = None,
                    weights: np.ndarray | None = None) -> GrResult:
    return GrResult(
        gr=gr,
        sigma=np.eye(9, dtype=complex) / 9,
        edge=rho.copy(),
        witness=witness,
        report=report,
        points=tuple(points) if points is not None else None,
        weights=weights,
    )


def _is_duplicate(point: ProductPoint, others: list[ProductPoint], tol: float = 1e-9) -> bool:
    for p in others:
        overlap = abs(np.vdot(p.a, point.a)) ** 2 * abs(np.vdot(p.b, point.b)) ** 2
        if overlap > 1 - tol:
            return True
    return False


def gr_eps_oew(
    rho: np.ndarray,
    epsilon: float = DEFAULT_EPSILON,
    seed: SeedSpec = SeedSpec(0, 0),
    max_outer: int = 200,
    restarts: int = 20,
    certify_restarts: int = 100,
    violation_tol: float = 1e-7,
    init_random_points: int = 50,
    max_new_points: int = 16,
    max_working_set: int = 150,
    gap_tol: float = 1e-4,
    init_points: tuple[ProductPoint, ...] | None = None,
    cut_sweeps: int = 80,
) -> GrResult:
    """Separability-relative GR by column generation with a see-saw oracle.

    The returned gr is always an upper bound on the true robustness (the
    working-set mixture is itself separable). Three certified exits end
    the loop: the see-saw finds no product state above 1 + violation_tol
    even after escalating to certify_restarts; the bound falls below
    0.9·epsilon, settling the only question epsilon is used for
    (entangled iff gr > epsilon); or the sandwich closes — W/v_max is a
    globally feasible witness for see-saw maximum v_max, so
    tr(Wρ)/v_max − 1 is a lower bound, and once it pinches the upper
    bound within gap_tol relative (re-checked against a certify-sized
    see-saw batch) the value is settled. The pinch exit additionally
    requires the lower bound to exceed epsilon, so loosening gap_tol
    can never flip the entangled/separable decision. The working set is
    capped at max_working_set columns by keeping the largest-weight
    ones; the nine computational product states stay pinned so the
    master is always feasible.

    init_points seeds the working set with extra columns, typically the
    solution support of a run on a nearby state; a good warm start only
    shrinks the first master value and never changes what is certified.

    cut_sweeps caps the see-saw sweep count while hunting cuts; partially
    converged product states are still exact columns, and the master
    solves dominate the cost, so shallow-but-many cuts run faster.
    Certification batches always use fully converged see-saws.
    """
    validate_density_matrix(rho, "rho")
    if epsilon <= 0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    rng = make_generator(seed)

    pinned = computational_points()  # keeps the master feasible: Σ|ij⟩⟨ij| = I
    points = list(pinned)
    for p in init_points or ():
        if not _is_duplicate(p, points):
            points.append(p)
    points += [ProductPoint.from_vectors(*product_vector(rng))
               for _ in range(init_random_points)]

    best: tuple[np.ndarray, np.ndarray, SdpReport, list[ProductPoint]] | None = None
    converged = False

    for _ in range(max_outer):
        try:
            q, witness, report = solve_master(points, rho)
        except SolverError:
            report = SdpReport(np.nan, np.nan, 0, "NumericalTrouble")
        if report.status != "Optimal":
            if best is None:
                break
            # degenerate late-stage master: retire unused columns and retry
            q0 = best[0]
            points = pinned + [p for p, w in zip(best[3][9:], q0[9:]) if w > 1e-8]
            try:
                q, witness, report = solve_master(points, rho)
            except SolverError:
                break
            if report.status != "Optimal":
                break  # keep the previous optimal iterate instead
        best = (q, witness, report, list(points))
        upper = float(np.sum(q)) - 1.0

        if upper <= 0.9 * epsilon:
            converged = True
            break

        a_vecs, b_vecs, vals = seesaw_batch(witness, restarts, rng,
                                            max_sweeps=cut_sweeps)
        certified = False
        if np.max(vals) <= 1 + violation_tol:
            a2, b2, v2 = seesaw_batch(witness, certify_restarts, rng)
            a_vecs = np.concatenate([a_vecs, a2])
            b_vecs = np.concatenate([b_vecs, b2])
            vals = np.concatenate([vals, v2])
            certified = True
            if np.max(vals) <= 1 + violation_tol:
                converged = True
                break
        lower = report.dual_value / float(np.max(vals)) - 1.0
        if upper - lower <= gap_tol * (1.0 + upper) and lower > epsilon:
            if not certified:
                # the lower bound leans on v_max; re-check with a full batch
                a2, b2, v2 = seesaw_batch(witness, certify_restarts, rng)
                a_vecs = np.concatenate([a_vecs, a2])
                b_vecs = np.concatenate([b_vecs, b2])
                vals = np.concatenate([vals, v2])
                lower = report.dual_value / float(np.max(vals)) - 1.0
            if upper - lower <= gap_tol * (1.0 + upper) and lower > epsilon:
                converged = True
                break

        cand_pts, _ = top_distinct_points(
            a_vecs, b_vecs, vals, k=max_new_points, min_value=1 + violation_tol)
        new_pts = [p for p in cand_pts if not _is_duplicate(p, points)]

        # primal repair: product states aligned with the part of rho the
        # current mixture covers worst; cheap and speeds the descent for
        # (nearly) separable inputs where witness cuts alone stall
        mix = np.einsum("k,kij->ij", q, np.stack([p.projector for p in points]))
        resid = hermitize(rho - mix / (1.0 + upper))
        ra, rb, rv = seesaw_batch(resid, max(restarts // 2, 5), rng,
                                  max_sweeps=cut_sweeps)
        rep_pts, _ = top_distinct_points(ra, rb, rv, k=5, min_value=-np.inf)
        new_pts += [p for p in rep_pts if not _is_duplicate(p, points + new_pts)]

        if not new_pts:
            break  # only rediscovered cuts; the bound cannot move further

        # retire zero-weight columns, keep the heaviest under the cap
        keep = max(max_working_set - 9 - len(new_pts), 0)
        ranked = sorted(zip(points[9:], q[9:]), key=lambda t: -t[1])[:keep]
        points = pinned + [p for p, w in ranked if w > 1e-10] + new_pts

    if best is None:
        report = SdpReport(np.nan, np.nan, 0, "NumericalTrouble")
        return _zero_gr_result(rho, 0.0, np.zeros((9, 9), dtype=complex), report)

    q, witness, report, solved_points = best
    gr_raw = float(np.sum(q) - 1.0)
    gr = max(gr_raw, 0.0)
    if not converged:
        report = SdpReport(
            report.primal_value, report.dual_value, report.iterations, "IterationCap")

    if gr < _GR_ZERO:
        return _zero_gr_result(rho, gr, witness, report, solved_points, q)
    mix = _mixture(solved_points, q)
    sigma = hermitize(mix - rho) / gr_raw
    edge = mix / (1.0 + gr_raw)
    return GrResult(
        gr=gr, sigma=sigma, edge=edge, witness=witness, report=report,
        points=tuple(solved_points), weights=q,
    )


_pt_svec_map: np.ndarray | None = None


def _pt_map() -> np.ndarray:
    """The 81×81 svec-coordinate matrix of the partial transpose."""
    global _pt_svec_map
    if _pt_svec_map is None:
        m = np.zeros((81, 81))
        for j in range(81):
            e = np.zeros(81)
            e[j] = 1.0
            m[:, j] = svec(partial_transpose(smat(e, 9)))
        _pt_svec_map = m
        _pt_svec_map.setflags(write=False)
    return _pt_svec_map


def gr_decomposable(rho: np.ndarray) -> GrResult:
    """PPT-relative GR: minimize tr(S), S ⪰ 0, (ρ+S)ᴳ ⪰ 0."""
    validate_density_matrix(rho, "rho")
    pt = _pt_map()
    c = svec(np.eye(9, dtype=complex))
    g = np.vstack([-np.eye(81), -pt])
    h = np.concatenate([np.zeros(81), svec(partial_transpose(rho))])
    sol = solve_conelp(c, g, h, l=0, psd_dims=[9, 9])
    report = _report_from(sol)

    s_mat = hermitize(smat(sol.x, 9))
    witness = hermitize(smat(sol.z[:81], 9))  # = I − Qᴳ with Q ⪰ 0 the other dual block
    gr_raw = float(np.trace(s_mat).real)
    gr = max(gr_raw, 0.0)
    if gr < _GR_ZERO:
        return _zero_gr_result(rho, gr, witness, report)
    sigma = s_mat / gr_raw
    edge = (rho + s_mat) / (1.0 + gr_raw)
    return GrResult(gr=gr, sigma=sigma, edge=edge, witness=witness, report=report)
