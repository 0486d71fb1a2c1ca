"""Cai-Zhang sin-Theta bounds for single perturbations and for model sets.

For ``C = U S V^T`` and a perturbed ``C_hat = C + Z``::

    alpha = sigma_min(U^T C_hat V)      beta = ||U_perp^T C_hat V_perp||
    z12   = ||U^T Z V_perp||            z21  = ||U_perp^T Z V||

    ||sin Theta(V, V_hat)|| <= (alpha z12 + beta z21) / (alpha^2 - beta^2 - min(z12^2, z21^2))  ^ 1

For a full-row-rank center the right bound collapses to ``z12 / alpha``.  The
set-level bounds replace ``z12`` and ``alpha`` with triangle-inequality and
Weyl estimates over the generator coefficients:

    f(xi) = sum_i |xi_i| mu_i / (sigma_min(C) - sum_i |xi_i| gamma_i),
    mu_i = ||U^T G_i V_perp||,  gamma_i = ||G_i||.

Every reported bound is clamped to ``[0, 1]``; a violated validity
precondition yields 1 and sets ``valid = False``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .identify import (
    NoiseModel,
    TrajectoryData,
    build_cmz_model_set,
    build_mz_model_set,
    data_pseudoinverse,
    noise_factor_generators,
)
from .nmz import NmzProvenance, nullspace_matrix_zonotope
from .setrep import ConstrainedMatrixZonotope, MatrixZonotope, SetError
from .spectral import DEFAULT_REL_TOL, rank_of, sin_theta, spectral_norm, svd_full


@dataclass(frozen=True)
class CaiZhangReport:
    alpha: float
    beta: float
    z12: float
    z21: float
    right_bound: float
    left_bound: float
    condition_ok: bool


@dataclass(frozen=True)
class MzBoundComponents:
    mu: np.ndarray
    gamma: np.ndarray
    sigma_min_C: float
    rank_r: int
    kappa: float | None = None
    mu_w: np.ndarray | None = None


@dataclass(frozen=True)
class MzBoundResult:
    bound: float
    components: MzBoundComponents
    valid: bool


@dataclass(frozen=True)
class CmzBoundResult:
    bound: float
    xi_max: np.ndarray
    valid: bool
    exact: bool
    components: MzBoundComponents


@dataclass(frozen=True)
class NmzBoundResult:
    bound: float
    vertex_bound: float
    global_bound: float | None
    valid: bool
    components: MzBoundComponents


def _clamp(x: float) -> float:
    if not np.isfinite(x) or x > 1.0:
        return 1.0
    return max(0.0, float(x))


def cai_zhang_pair(C, C_hat, rank_r: int | None = None) -> CaiZhangReport:
    C = np.atleast_2d(np.asarray(C, dtype=float))
    C_hat = np.atleast_2d(np.asarray(C_hat, dtype=float))
    if C.shape != C_hat.shape:
        raise ValueError(f"shape mismatch {C.shape} vs {C_hat.shape}")
    r = rank_of(C) if rank_r is None else int(rank_r)
    if not 1 <= r <= min(C.shape):
        raise ValueError(f"rank_r must lie in [1, {min(C.shape)}]")
    f = svd_full(C)
    U, Up, V, Vp = f.left(r), f.left_perp(r), f.right(r), f.right_perp(r)
    Z = C_hat - C
    alpha = float(np.linalg.svd(U.T @ C_hat @ V, compute_uv=False)[-1])
    beta = spectral_norm(Up.T @ C_hat @ Vp)
    z12 = spectral_norm(U.T @ Z @ Vp)
    z21 = spectral_norm(Up.T @ Z @ V)
    den = alpha**2 - beta**2 - min(z12**2, z21**2)
    ok = den > 0.0
    if not ok:
        return CaiZhangReport(alpha, beta, z12, z21, 1.0, 1.0, False)
    right = _clamp((alpha * z12 + beta * z21) / den)
    left = _clamp((alpha * z21 + beta * z12) / den)
    return CaiZhangReport(alpha, beta, z12, z21, right, left, True)


def full_row_rank_bound(C, Z) -> float:
    """``||U^T Z V_perp|| / sigma_min(U^T (C + Z) V)`` for full-row-rank ``C``."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    m = C.shape[0]
    if rank_of(C) != m:
        raise ValueError("C must have full row rank")
    f = svd_full(C)
    U, V, Vp = f.left(m), f.right(m), f.right_perp(m)
    num = spectral_norm(U.T @ Z @ Vp)
    if num == 0.0:
        return 0.0
    alpha = float(np.linalg.svd(U.T @ (C + Z) @ V, compute_uv=False)[-1])
    return np.inf if alpha <= 0.0 else num / alpha


def right_subspace_distance(C, C_hat, rank_r: int | None = None) -> float:
    """Measured ``||sin Theta(V, V_hat)||`` for the leading ``r`` right singular vectors."""
    r = rank_of(C) if rank_r is None else int(rank_r)
    return sin_theta(svd_full(C).right(r), svd_full(C_hat).right(r))


def bound_components(center, generators, rank_r: int | None = None) -> MzBoundComponents:
    """``mu``, ``gamma`` and ``sigma_r(C)`` from the leading-r SVD of the center."""
    C = np.asarray(center, dtype=float)
    G = np.asarray(generators, dtype=float).reshape((-1,) + C.shape)
    r = rank_of(C) if rank_r is None else int(rank_r)
    f = svd_full(C)
    U, Vp = f.left(r), f.right_perp(r)
    proj = np.einsum("ar,iab,bk->irk", U, G, Vp)
    mu = np.array([spectral_norm(p) for p in proj])
    gamma = np.array([spectral_norm(g) for g in G])
    sig = float(f.S[r - 1]) if r >= 1 else 0.0
    return MzBoundComponents(mu, gamma, sig, r)


def _precondition(center, comps: MzBoundComponents) -> bool:
    return comps.rank_r == center.shape[0] and comps.sigma_min_C > 0.0


def vertex_formula(comps: MzBoundComponents) -> float:
    den = comps.sigma_min_C - float(np.sum(comps.gamma))
    num = float(np.sum(comps.mu))
    if den <= 0.0:
        return np.inf
    return num / den


def mz_vertex_bound(M: MatrixZonotope, rank_r: int | None = None) -> MzBoundResult:
    """``sum mu / (sigma_min(C) - sum gamma)``: the maximum of ``f`` over the box."""
    comps = bound_components(M.center, M.generators, rank_r)
    if M.num_generators == 0:
        return MzBoundResult(0.0, comps, True)
    val = vertex_formula(comps)
    valid = _precondition(M.center, comps) and np.isfinite(val)
    return MzBoundResult(_clamp(val) if valid else 1.0, comps, bool(valid))


def check_shared_factor(generators, left_factors, H, tol: float = 1e-8) -> bool:
    G = np.asarray(generators, dtype=float)
    L = np.asarray(left_factors, dtype=float)
    if L.shape[0] != G.shape[0]:
        return False
    recon = L @ H
    scale = 1.0 + np.max(np.abs(G), initial=0.0)
    return bool(np.max(np.abs(recon - G), initial=0.0) <= tol * scale)


def _global_parts(center, left_factors, H, rank_r):
    r = rank_of(center) if rank_r is None else int(rank_r)
    f = svd_full(center)
    U, Vp = f.left(r), f.right_perp(r)
    kappa = spectral_norm(H @ Vp)
    mu_w = np.array([spectral_norm(U.T @ L) for L in left_factors])
    return kappa, mu_w


def mz_global_bound(M: MatrixZonotope, noise_generators, H, rank_r: int | None = None) -> float:
    """``kappa sum mu_w / (sigma_min(C) - sum gamma)`` with ``kappa = ||H V_perp||``.

    ``noise_generators`` are the left factors ``L_i`` with ``G_i = L_i H``.
    """
    H = np.asarray(H, dtype=float)
    if M.num_generators == 0:
        return 0.0
    if not check_shared_factor(M.generators, noise_generators, H):
        raise ValueError("generators do not factor as L_i H")
    comps = bound_components(M.center, M.generators, rank_r)
    if not _precondition(M.center, comps):
        return 1.0
    kappa, mu_w = _global_parts(M.center, noise_generators, H, rank_r)
    den = comps.sigma_min_C - float(np.sum(comps.gamma))
    if den <= 0.0:
        return 1.0
    return _clamp(kappa * float(np.sum(mu_w)) / den)


def cmz_worst_case_bound(N: ConstrainedMatrixZonotope, rank_r: int | None = None, method: str = "auto", node_limit: int = 4096) -> CmzBoundResult:
    """Maximum of ``f`` over the constrained coefficient set.

    The fractional program is solved by Charnes-Cooper LPs inside a sign
    branch-and-bound; when the node budget runs out the certified upper bound
    is reported (``exact = False``).
    """
    comps = bound_components(N.center, N.generators, rank_r)
    g = N.num_generators
    if g == 0:
        return CmzBoundResult(0.0, np.zeros(0), True, True, comps)
    if not _precondition(N.center, comps):
        return CmzBoundResult(1.0, np.zeros(g), False, True, comps)
    A = N.con_A if N.num_constraints else None
    b = N.con_b if N.num_constraints else None
    if not lp.check_denominator_positive(comps.gamma, comps.sigma_min_C, A, b, method, node_limit):
        return CmzBoundResult(1.0, np.zeros(g), False, True, comps)
    res = lp.charnes_cooper_max_ratio(comps.mu, comps.gamma, comps.sigma_min_C, A, b, method, node_limit)
    value = res.ratio if res.exact else res.upper_bound
    return CmzBoundResult(_clamp(value), res.xi_max, True, res.exact, comps)


def nmz_bound(P: MatrixZonotope, provenance: NmzProvenance | None = None, H=None, noise_generators=None, rank_r: int | None = None) -> NmzBoundResult:
    """Vertex bound of the NMZ, refined by the shared-factor form when possible.

    The refined form needs ``H`` and the left factors ``L_i`` of the original
    CMZ generators (``G_i = L_i H``); the effective left factors are
    ``sum_i (G_xi)_ij L_i``.  The smaller of the available forms is returned.
    """
    vb = mz_vertex_bound(P, rank_r)
    comps = vb.components
    if P.num_generators == 0:
        return NmzBoundResult(0.0, 0.0, None, True, comps)
    glob = None
    if provenance is not None and H is not None and noise_generators is not None and vb.valid:
        L = np.asarray(noise_generators, dtype=float)
        G_xi = provenance.coeff_zonotope.generators
        L_eff = np.tensordot(G_xi.T, L, axes=1)
        kappa, mu_w = _global_parts(P.center, L_eff, np.asarray(H, dtype=float), rank_r)
        den = comps.sigma_min_C - float(np.sum(comps.gamma))
        glob = _clamp(kappa * float(np.sum(mu_w)) / den) if den > 0 else 1.0
        comps = MzBoundComponents(comps.mu, comps.gamma, comps.sigma_min_C, comps.rank_r, kappa, mu_w)
    best = vb.bound if glob is None else min(vb.bound, glob)
    return NmzBoundResult(best, vb.bound, glob, vb.valid, comps)


# --------------------------------------------------------------------------
# Data-scaling sweep
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    scale: float
    mz_bound: float
    cmz_bound: float
    nmz_bound: float
    kappa: float
    sigma_min: float

    FIELDS = ("scale", "mz_bound", "cmz_bound", "nmz_bound", "kappa", "sigma_min")

    def as_tuple(self):
        return tuple(getattr(self, k) for k in self.FIELDS)


def scaling_sweep(
    base_data: TrajectoryData,
    noise: NoiseModel,
    scales,
    rank_r: int | None = None,
    method: str = "auto",
    node_limit: int = 256,
    rel_tol: float = DEFAULT_REL_TOL,
) -> list[SweepRow]:
    """Recompute the MZ, CMZ and NMZ bounds on rescaled data.

    An empty CMZ coefficient set (possible when rescaling data without a
    recorded noise sequence) is reported as ``nan`` in the CMZ and NMZ columns.
    """
    scales = [float(s) for s in scales]
    if any(s <= 0 for s in scales) or scales != sorted(scales):
        raise ValueError("scales must be positive and sorted ascending")
    rows = []
    for d in scales:
        data = base_data.scaled(d)
        H = data_pseudoinverse(data, rel_tol)
        M = build_mz_model_set(data, noise, rel_tol)
        mzb = mz_vertex_bound(M, rank_r)
        L = noise_factor_generators(noise, data.T)
        kappa, _ = _global_parts(M.center, L[:1], H, rank_r)
        try:
            N = build_cmz_model_set(data, noise, rel_tol)
        except SetError:
            rows.append(SweepRow(d, mzb.bound, np.nan, np.nan, kappa, mzb.components.sigma_min_C))
            continue
        cmzb = cmz_worst_case_bound(N, rank_r, method, node_limit)
        res = nullspace_matrix_zonotope(N, method, rel_tol)
        nb = nmz_bound(res.nmz, res.provenance, H, L, rank_r)
        rows.append(SweepRow(d, mzb.bound, cmzb.bound, nb.bound, kappa, mzb.components.sigma_min_C))
    return rows
