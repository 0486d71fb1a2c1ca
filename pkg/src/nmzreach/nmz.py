"""Nullspace matrix zonotope: an unconstrained over-approximation of a CMZ.

Pipeline for a CMZ with coefficient set ``Xi = {A xi = b, |xi| <= 1}``:

1. ``xi = xi_p + A_perp x`` parametrizes every solution of ``A xi = b``; the
   box turns into ``P' = {x : Q x <= s}`` with ``Q = [I; -I] A_perp`` and
   ``s = 1 - [xi_p; -xi_p]``.
2. ``P'`` is boxed coordinate-wise by 2 nu LPs.
3. The box is lifted back into a coefficient zonotope
   ``Z_xi = <xi_p + A_perp c_I, A_perp diag(r_I)>`` containing Xi.
4. Mixing the CMZ generators through ``Z_xi`` gives a matrix zonotope with
   nu generators that contains the CMZ.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .identify import NoiseModel, TrajectoryData, build_noise_cmz, data_nullspace
from .setrep import (
    ConstrainedMatrixZonotope,
    Interval,
    MatrixZonotope,
    SetError,
    Zonotope,
    coefficient_set_feasible,
)
from .spectral import DEFAULT_REL_TOL, nullspace_basis, pseudoinverse, rank_of


@dataclass(frozen=True, eq=False)
class ProjectedPolytope:
    Q: np.ndarray
    s: np.ndarray
    xi_p: np.ndarray
    null_basis: np.ndarray

    @property
    def nullity(self) -> int:
        return self.null_basis.shape[1]

    def lift(self, x) -> np.ndarray:
        """Map nullspace coordinates back to coefficients (row-wise for 2-D input)."""
        x = np.asarray(x, dtype=float)
        return self.xi_p + x @ self.null_basis.T

    def project(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return (xi - self.xi_p) @ self.null_basis


@dataclass(frozen=True, eq=False)
class NmzProvenance:
    coeff_zonotope: Zonotope
    projected: ProjectedPolytope
    interval: Interval

    def to_dict(self) -> dict:
        return {
            "nu": self.projected.nullity,
            "xi_p": self.projected.xi_p.tolist(),
            "c_xi": self.coeff_zonotope.center.tolist(),
            "G_xi": self.coeff_zonotope.generators.tolist(),
            "interval_lower": self.interval.lower.tolist(),
            "interval_upper": self.interval.upper.tolist(),
        }


@dataclass(frozen=True, eq=False)
class NmzResult:
    nmz: MatrixZonotope
    provenance: NmzProvenance


def project_coefficient_polytope(con_A, con_b, rel_tol: float = DEFAULT_REL_TOL) -> ProjectedPolytope:
    A = np.atleast_2d(np.asarray(con_A, dtype=float))
    b = np.asarray(con_b, dtype=float).ravel()
    if A.shape[0] and not coefficient_set_feasible(A, b):
        raise SetError("coefficient set is empty")
    basis = nullspace_basis(A, rel_tol)
    xi_p = pseudoinverse(A, rel_tol) @ b if A.shape[0] else np.zeros(A.shape[1])
    gamma = A.shape[1]
    eye = np.eye(gamma)
    Q = np.vstack([eye, -eye]) @ basis
    s = 1.0 - np.concatenate([xi_p, -xi_p])
    return ProjectedPolytope(Q, s, xi_p, basis)


def interval_overapprox(P: ProjectedPolytope, method: str = "auto") -> Interval:
    """Per-coordinate min/max of ``x`` over ``Q x <= s``."""
    nu = P.nullity
    if nu == 0:
        return Interval(np.zeros(0), np.zeros(0))
    prog = lp.LinearProgram(np.zeros(nu), ineq_A=P.Q, ineq_b=P.s)
    sols = lp.solve_lp_batch(prog, [np.eye(nu)[j] for j in range(nu) for _ in range(2)], ["min", "max"] * nu, method)
    vals = np.empty(2 * nu)
    for k, sol in enumerate(sols):
        if sol.status is lp.LpStatus.INFEASIBLE:
            raise SetError("projected coefficient polytope is empty")
        if sol.status is lp.LpStatus.UNBOUNDED:
            raise lp.LpError("projected polytope unbounded; the null basis is not injective")
        if not sol.optimal:
            raise lp.LpError(f"interval LP ended with status {sol.status.value}")
        vals[k] = sol.objective_value
    lo, hi = vals[0::2], vals[1::2]
    return Interval(lo, np.maximum(hi, lo))


def lift_coefficient_zonotope(P: ProjectedPolytope, I: Interval) -> Zonotope:
    if I.dim != P.nullity:
        raise SetError(f"interval dimension {I.dim} differs from nullity {P.nullity}")
    return Zonotope(P.xi_p + P.null_basis @ I.center, P.null_basis * I.radius[None, :])


def build_nmz(N: ConstrainedMatrixZonotope, Z_xi: Zonotope) -> MatrixZonotope:
    """``C_M = C_N + sum_i c_i G_i`` and ``G_M^(j) = sum_i (G_xi)_ij G_i``."""
    if Z_xi.dim != N.num_generators:
        raise SetError(f"coefficient zonotope has dimension {Z_xi.dim}, CMZ has {N.num_generators} generators")
    G = N.generators
    if G.shape[0] == 0:
        return MatrixZonotope(N.center, None)
    center = N.center + np.tensordot(Z_xi.center, G, axes=1)
    gens = np.tensordot(Z_xi.generators.T, G, axes=1)
    return MatrixZonotope(center, gens)


def nullspace_matrix_zonotope(N: ConstrainedMatrixZonotope, method: str = "auto", rel_tol: float = DEFAULT_REL_TOL) -> NmzResult:
    """Run the full projection, boxing and lifting pipeline on ``N``."""
    P = project_coefficient_polytope(N.con_A, N.con_b, rel_tol)
    I = interval_overapprox(P, method)
    Z_xi = lift_coefficient_zonotope(P, I)
    return NmzResult(build_nmz(N, Z_xi), NmzProvenance(Z_xi, P, I))


def nmz_coefficients(provenance: NmzProvenance, xi) -> np.ndarray:
    """Coefficients ``eta`` with ``c_xi + G_xi eta = xi`` (least squares)."""
    Z = provenance.coeff_zonotope
    xi = np.asarray(xi, dtype=float)
    if Z.num_generators == 0:
        return np.zeros(xi.shape[:-1] + (0,))
    rhs = (xi - Z.center).T
    eta = np.linalg.lstsq(Z.generators, rhs, rcond=None)[0]
    return eta.T


# --------------------------------------------------------------------------
# Sampling of the coefficient set
# --------------------------------------------------------------------------


def sample_coefficient_space(con_A, con_b, count: int, rng: np.random.Generator, vertex_fraction: float = 0.2, method: str = "auto") -> np.ndarray:
    """Points of ``Xi`` (rows): LP vertices for random objectives plus hit-and-run.

    Hit-and-run runs in nullspace coordinates, so every sample satisfies
    ``A xi = b`` up to rounding and the box exactly up to rounding.
    """
    P = project_coefficient_polytope(con_A, con_b)
    nu = P.nullity
    if nu == 0:
        return np.tile(P.xi_p, (count, 1))
    n_vert = max(1, int(round(vertex_fraction * count)))
    verts = []
    for _ in range(n_vert):
        c = rng.standard_normal(nu)
        sol = lp.solve_lp(lp.LinearProgram(c, ineq_A=P.Q, ineq_b=P.s), method)
        if not sol.optimal:
            raise lp.LpError(f"sampling LP ended with status {sol.status.value}")
        verts.append(sol.x)
    verts = np.array(verts)
    x = verts.mean(axis=0)
    walk = []
    for _ in range(count - n_vert):
        d = rng.standard_normal(nu)
        d /= np.linalg.norm(d)
        qd = P.Q @ d
        slack = np.maximum(P.s - P.Q @ x, 0.0)
        with np.errstate(divide="ignore"):
            steps = slack / qd
        t_hi = np.min(steps[qd > 1e-14], initial=np.inf)
        t_lo = np.max(steps[qd < -1e-14], initial=-np.inf)
        if np.isfinite(t_hi) and np.isfinite(t_lo) and t_hi > t_lo:
            x = x + rng.uniform(t_lo, t_hi) * d
        walk.append(x.copy())
    xs = np.vstack([verts] + ([np.array(walk)] if walk else []))
    return np.clip(P.lift(xs), -1.0, 1.0)


# --------------------------------------------------------------------------
# Rank and nullity structure of the noise constraints
# --------------------------------------------------------------------------


def predict_nullity(T: int, n: int, m: int, rank_D: int, gamma_Zw: int, rank_GZw: int) -> int:
    """Nullity of the noise constraint matrix: ``gamma T - (T - rank D) rank G``."""
    if rank_D > min(n + m, T) or rank_GZw > min(n, gamma_Zw) or min(T, n, m, rank_D, gamma_Zw, rank_GZw) < 0:
        raise ValueError("inconsistent rank arguments")
    nu = gamma_Zw * T - (T - rank_D) * rank_GZw
    if nu < 0:
        raise ValueError(f"negative nullity {nu}: inconsistent arguments")
    return nu


@dataclass(frozen=True)
class StructuralReport:
    T: int
    n: int
    m: int
    rank_D: int
    gamma_Zw: int
    rank_GZw: int
    numeric_rank: int
    predicted_rank: int
    numeric_nullity: int
    predicted_nullity: int

    @property
    def rank_agrees(self) -> bool:
        return self.numeric_rank == self.predicted_rank

    @property
    def nullity_agrees(self) -> bool:
        return self.numeric_nullity == self.predicted_nullity

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["rank_agrees"] = self.rank_agrees
        d["nullity_agrees"] = self.nullity_agrees
        return d


def structural_rank_check(noise: NoiseModel, data: TrajectoryData, rel_tol: float = DEFAULT_REL_TOL) -> StructuralReport:
    """Compare the numeric rank/nullity of the constraint matrix with the Kronecker prediction."""
    N_w = build_noise_cmz(noise, data, rel_tol, validate=False)
    A = N_w.con_A
    gamma = A.shape[1]
    rank_D = rank_of(data.D, rel_tol)
    rank_G = rank_of(noise.zonotope.generators, rel_tol) if noise.num_generators else 0
    numeric_rank = rank_of(A, rel_tol) if A.shape[0] else 0
    rank_Dp = data_nullspace(data, rel_tol).shape[1]
    return StructuralReport(
        T=data.T,
        n=data.n,
        m=data.m,
        rank_D=rank_D,
        gamma_Zw=noise.num_generators,
        rank_GZw=rank_G,
        numeric_rank=numeric_rank,
        predicted_rank=rank_Dp * rank_G,
        numeric_nullity=gamma - numeric_rank,
        predicted_nullity=predict_nullity(data.T, data.n, data.m, rank_D, noise.num_generators, rank_G),
    )
