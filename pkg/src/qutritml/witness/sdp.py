"""Dense primal-dual interior-point solver for small conic programs.

Solves  minimize    c·x
        subject to  G x + s = h,   s ∈ K

where K is a product of a nonnegative orthant (dimension ``l``) and
Hermitian PSD blocks (``psd_dims``). The dual is

        maximize   −h·z
        subject to G^T z + c = 0,  z ∈ K.

Hermitian blocks travel through G, h, s, z in ``svec`` coordinates:
the d diagonal entries, then (√2·Re, √2·Im) of each strict upper
triangle entry in row-major order. The ordering makes svec an isometry
between the Hermitian matrices under tr(AB) and ℝ^(d²), so the cone is
self-dual in these coordinates and duality gaps read off as s·z.

The algorithm is the standard Nesterov-Todd scaled predictor-corrector:
at each iterate the scaling point r (computed from Cholesky factors of
s and z plus one SVD) maps both variables to the same diagonal λ, the
Schur complement Gs^T Gs of the scaled constraint matrix is formed and
factorized once, and a Mehrotra affine/centering pair of directions is
extracted from it. Problems here have at most a few hundred variables
and one 9×9 block, so dense factorizations are the right tool.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, PreconditionError

_SQ2 = np.sqrt(2.0)
_svec_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _triu_idx(d: int) -> tuple[np.ndarray, np.ndarray]:
    if d not in _svec_cache:
        iu = np.triu_indices(d, k=1)
        _svec_cache[d] = (iu[0], iu[1])
    return _svec_cache[d]


def svec(m: np.ndarray) -> np.ndarray:
    """Isometric real coordinates of a Hermitian matrix."""
    d = m.shape[0]
    i, j = _triu_idx(d)
    out = np.empty(d * d)
    out[:d] = m.diagonal().real
    out[d : d + i.size] = _SQ2 * m[i, j].real
    out[d + i.size :] = _SQ2 * m[i, j].imag
    return out


def smat(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of svec."""
    i, j = _triu_idx(d)
    m = np.zeros((d, d), dtype=complex)
    np.fill_diagonal(m, v[:d])
    upper = (v[d : d + i.size] + 1j * v[d + i.size :]) / _SQ2
    m[i, j] = upper
    m[j, i] = upper.conj()
    return m


def svec_stack(ms: np.ndarray) -> np.ndarray:
    """svec applied along the first axis of an (n, d, d) stack -> (n, d²)."""
    n, d, _ = ms.shape
    i, j = _triu_idx(d)
    out = np.empty((n, d * d))
    out[:, :d] = np.diagonal(ms, axis1=1, axis2=2).real
    out[:, d : d + i.size] = _SQ2 * ms[:, i, j].real
    out[:, d + i.size :] = _SQ2 * ms[:, i, j].imag
    return out


def smat_stack(vs: np.ndarray, d: int) -> np.ndarray:
    """Inverse of svec_stack: (n, d²) -> (n, d, d)."""
    n = vs.shape[0]
    i, j = _triu_idx(d)
    ms = np.zeros((n, d, d), dtype=complex)
    rows = np.arange(d)
    ms[:, rows, rows] = vs[:, :d]
    upper = (vs[:, d : d + i.size] + 1j * vs[:, d + i.size :]) / _SQ2
    ms[:, i, j] = upper
    ms[:, j, i] = upper.conj()
    return ms


@dataclass
class ConeLPSolution:
    x: np.ndarray
    s: np.ndarray
    z: np.ndarray
    status: str  # Optimal | IterationCap | NumericalTrouble | PrimalInfeasible
    iterations: int
    primal_objective: float
    dual_objective: float
    rel_gap: float
    primal_residual: float
    dual_residual: float


def _chol(m: np.ndarray) -> np.ndarray | None:
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return None


def _chol_jitter(m: np.ndarray) -> np.ndarray | None:
    """Cholesky with escalating diagonal regularization."""
    f = _chol(m)
    if f is not None:
        return f
    scale = max(float(np.trace(m).real) / m.shape[0], 1e-12)
    for k in range(3):
        f = _chol(m + scale * 10.0 ** (k - 10) * np.eye(m.shape[0], dtype=m.dtype))
        if f is not None:
            return f
    return None


class _Blocks:
    """Cone layout bookkeeping: slices of the m-vector per block."""

    def __init__(self, l: int, psd_dims: list[int]):
        self.l = l
        self.dims = list(psd_dims)
        self.slices = []
        off = l
        for d in psd_dims:
            self.slices.append(slice(off, off + d * d))
            off += d * d
        self.m = off
        self.order = l + sum(psd_dims)  # barrier parameter ν

    def identity(self) -> np.ndarray:
        e = np.zeros(self.m)
        e[: self.l] = 1.0
        for d, sl in zip(self.dims, self.slices):
            e[sl][:d] = 1.0  # svec of I: ones on the diagonal slots
        return e


def _max_step(lin: np.ndarray, dlin: np.ndarray, mats: list[np.ndarray],
              dmats: list[np.ndarray], chols: list[np.ndarray]) -> float:
    """Largest t ≤ 1e12 keeping (lin + t·dlin, mats + t·dmats) in the cone."""
    t = 1e12
    neg = dlin < 0
    if np.any(neg):
        t = min(t, float(np.min(-lin[neg] / dlin[neg])))
    for mat, dmat, lo in zip(mats, dmats, chols):
        y = np.linalg.solve(lo, dmat)
        y = np.linalg.solve(lo, y.conj().T).conj().T
        wmin = float(np.linalg.eigvalsh((y + y.conj().T) / 2)[0])
        if wmin < 0:
            t = min(t, -1.0 / wmin)
    return t


def solve_conelp(
    c: np.ndarray,
    G: np.ndarray,
    h: np.ndarray,
    l: int,
    psd_dims: list[int],
    max_iter: int = 100,
    feas_tol: float = 1e-8,
    gap_tol: float = 1e-7,
    abs_gap_tol: float = 1e-9,
) -> ConeLPSolution:
    """Run the interior-point iteration on one problem instance."""
    c = np.asarray(c, dtype=float)
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    blocks = _Blocks(l, psd_dims)
    n = c.size
    if G.shape != (blocks.m, n) or h.size != blocks.m:
        raise DimensionError(
            f"inconsistent conic data: G {G.shape}, h {h.size}, expected m={blocks.m}, n={n}")
    if n == 0:
        raise PreconditionError("problem has no variables")

    # constraint columns per PSD block as matrix stacks, unpacked once
    g_mats = [smat_stack(G[sl].T, d) for d, sl in zip(blocks.dims, blocks.slices)]

    e = blocks.identity()
    x = np.zeros(n)
    s = e.copy()
    z = e.copy()
    norm_c = max(1.0, float(np.linalg.norm(c)))
    norm_h = max(1.0, float(np.linalg.norm(h)))

    def split(v: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        return v[: blocks.l], [smat(v[sl], d) for d, sl in zip(blocks.dims, blocks.slices)]

    status = "IterationCap"
    it = 0
    pobj = dobj = rel = pres = dres = np.inf

    for it in range(max_iter + 1):
        rx = G.T @ z + c
        rz = G @ x + s - h
        gap = float(s @ z)
        pobj = float(c @ x)
        dobj = -float(h @ z)
        pres = float(np.linalg.norm(rz)) / norm_h
        dres = float(np.linalg.norm(rx)) / norm_c
        rel = abs(pobj - dobj) / max(1.0, abs(pobj), abs(dobj))
        if pres <= feas_tol and dres <= feas_tol and (rel <= gap_tol or gap <= abs_gap_tol):
            status = "Optimal"
            break
        if not np.isfinite(gap) or not np.isfinite(pres):
            status = "NumericalTrouble"
            break
        # Farkas-style certificate of primal infeasibility: z in K*,
        # G^T z ≈ 0, h·z < 0 (then no x can satisfy Gx + s = h).
        zn = float(np.linalg.norm(z))
        if zn > 0 and -float(h @ z) / zn > 1e-6 and float(np.linalg.norm(G.T @ z)) / zn < 1e-9:
            status = "PrimalInfeasible"
            break
        if it == max_iter:
            break

        mu = gap / blocks.order

        s_lin, s_mats = split(s)
        z_lin, z_mats = split(z)

        # Nesterov-Todd scaling: map s and z to a common diagonal λ
        w_lin = np.sqrt(s_lin / z_lin) if blocks.l else np.empty(0)
        lam_lin = np.sqrt(s_lin * z_lin) if blocks.l else np.empty(0)
        r_list, rinv_list, lam_list, ls_list, lz_list = [], [], [], [], []
        broke = False
        for smt, zmt in zip(s_mats, z_mats):
            ls = _chol_jitter(smt)
            lz = _chol_jitter(zmt)
            if ls is None or lz is None:
                broke = True
                break
            u, sig, vh = np.linalg.svd(lz.conj().T @ ls)
            r = ls @ vh.conj().T / np.sqrt(sig)
            rinv = np.linalg.solve(ls, np.eye(ls.shape[0], dtype=complex))
            rinv = (np.sqrt(sig)[:, None] * vh) @ rinv
            r_list.append(r)
            rinv_list.append(rinv)
            lam_list.append(sig)
            ls_list.append(ls)
            lz_list.append(lz)
        if broke:
            status = "NumericalTrouble"
            break

        # scaled constraint matrix Gs = W^{-T} G and Schur complement
        gs_rows = [G[: blocks.l] / w_lin[:, None]] if blocks.l else []
        for fmats, rinv in zip(g_mats, rinv_list):
            scaled = np.einsum("ab,nbc,dc->nad", rinv, fmats, rinv.conj())
            gs_rows.append(svec_stack(scaled).T)
        Gs = np.vstack(gs_rows) if gs_rows else np.empty((0, n))
        schur = Gs.T @ Gs
        schur_f = _chol_jitter(schur)
        if schur_f is not None:
            lo = schur_f

            def solve_schur(rhs: np.ndarray) -> np.ndarray:
                return np.linalg.solve(lo.T, np.linalg.solve(lo, rhs))
        else:
            # nearly parallel columns: eigenvalue-floored pseudo-solve
            ew, ev = np.linalg.eigh((schur + schur.T) / 2)
            ew = np.maximum(ew, max(ew[-1], 1e-300) * 1e-13)

            def solve_schur(rhs: np.ndarray) -> np.ndarray:
                return ev @ ((ev.T @ rhs) / ew)

        def apply_winv_t(v: np.ndarray) -> np.ndarray:
            """W^{-T} v blockwise: divide by w, conjugate by r^{-1}."""
            out = np.empty(blocks.m)
            out[: blocks.l] = v[: blocks.l] / w_lin if blocks.l else v[: blocks.l]
            for d, sl, rinv in zip(blocks.dims, blocks.slices, rinv_list):
                mtx = smat(v[sl], d)
                out[sl] = svec(rinv @ mtx @ rinv.conj().T)
            return out

        def solve_direction(dsl: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
            """Directions from scaled-complementarity RHS dsl = L_λ^{-1}(ds)."""
            rhs = -rx - Gs.T @ (apply_winv_t(rz) + dsl)
            dx = solve_schur(rhs)
            u = apply_winv_t(G @ dx + rz) + dsl
            dz = np.empty(blocks.m)
            dz[: blocks.l] = u[: blocks.l] / w_lin if blocks.l else u[: blocks.l]
            for d, sl, rinv in zip(blocks.dims, blocks.slices, rinv_list):
                dz[sl] = svec(rinv.conj().T @ smat(u[sl], d) @ rinv)
            ds = -rz - G @ dx
            return dx, ds, dz

        def lam_solve(ds_lin: np.ndarray, ds_mats: list[np.ndarray]) -> np.ndarray:
            """Apply L_λ^{-1} per block and pack as one m-vector."""
            out = np.empty(blocks.m)
            out[: blocks.l] = ds_lin / lam_lin if blocks.l else ds_lin
            for sl, lam, mat in zip(blocks.slices, lam_list, ds_mats):
                denom = (lam[:, None] + lam[None, :]) / 2
                out[sl] = svec(mat / denom)
            return out

        # affine (predictor) direction: ds = -λ∘λ
        dsl_aff = lam_solve(-(lam_lin**2), [-np.diag(lam**2).astype(complex) for lam in lam_list])
        dx_a, ds_a, dz_a = solve_direction(dsl_aff)

        ds_lin_a, ds_mats_a = split(ds_a)
        dz_lin_a, dz_mats_a = split(dz_a)
        t_s = _max_step(s_lin, ds_lin_a, s_mats, ds_mats_a, ls_list)
        t_z = _max_step(z_lin, dz_lin_a, z_mats, dz_mats_a, lz_list)
        alpha_aff = min(1.0, t_s, t_z)
        mu_aff = float((s + alpha_aff * ds_a) @ (z + alpha_aff * dz_a)) / blocks.order
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))

        # combined (corrector) direction:
        # ds = -λ∘λ - (W^{-T}Δs_aff)∘(WΔz_aff) + σμe
        corr_lin = -(lam_lin**2) + sigma * mu
        if blocks.l:
            corr_lin -= (ds_lin_a / w_lin) * (w_lin * dz_lin_a)
        corr_mats = []
        for d, lam, r, rinv, dsm, dzm in zip(
                blocks.dims, lam_list, r_list, rinv_list, ds_mats_a, dz_mats_a):
            a = rinv @ dsm @ rinv.conj().T
            b = r.conj().T @ dzm @ r
            cross = (a @ b + b @ a) / 2
            corr_mats.append(-np.diag(lam**2).astype(complex) - cross
                             + sigma * mu * np.eye(d, dtype=complex))
        dsl = lam_solve(corr_lin, corr_mats)
        dx, ds, dz = solve_direction(dsl)

        ds_lin, ds_mats = split(ds)
        dz_lin, dz_mats = split(dz)
        t_s = _max_step(s_lin, ds_lin, s_mats, ds_mats, ls_list)
        t_z = _max_step(z_lin, dz_lin, z_mats, dz_mats, lz_list)
        alpha = min(1.0, 0.99 * min(t_s, t_z))
        if alpha < 1e-13:
            status = "NumericalTrouble"
            break
        x = x + alpha * dx
        s = s + alpha * ds
        z = z + alpha * dz

    return ConeLPSolution(
        x=x, s=s, z=z, status=status, iterations=it,
        primal_objective=pobj, dual_objective=dobj,
        rel_gap=rel, primal_residual=pres, dual_residual=dres,
    )
