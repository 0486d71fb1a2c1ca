"""Reachable-set propagation with MZ, CMZ and NMZ model sets.

Every method iterates ``R_{k+1} = M (R_k x U_k) + W`` followed by order
reduction.  The MZ and NMZ engines work on zonotopes; the CMZ engine works on
constrained zonotopes and carries the data constraints along.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .nmz import NmzProvenance, nullspace_matrix_zonotope
from .setrep import (
    CoefficientBounds,
    ConstrainedMatrixZonotope,
    ConstrainedZonotope,
    Interval,
    MatrixZonotope,
    SetError,
    Zonotope,
    _girard_split,
    cross_term_scales,
    cz_cartesian_product,
    cz_coefficient_bounds,
    cz_interval_hull,
    cz_membership_residuals,
    interval_hull,
    mz_times_zonotope,
    zono_cartesian_product,
    zono_minkowski_sum,
    zono_reduce_girard,
)

METHODS = ("mz", "cmz", "nmz")


@dataclass(frozen=True, eq=False)
class ReachConfig:
    horizon: int
    reduction_order: int
    input_sets: tuple
    noise_set: Zonotope
    initial_set: Zonotope

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.reduction_order < 1:
            raise ValueError("reduction_order must be >= 1")
        inputs = self.input_sets
        if isinstance(inputs, Zonotope):
            inputs = (inputs,)
        inputs = tuple(inputs)
        if len(inputs) not in (1, self.horizon):
            raise ValueError("give one input set or one per step")
        if self.noise_set.dim != self.initial_set.dim:
            raise ValueError("noise and initial set dimensions differ")
        if len({u.dim for u in inputs}) != 1:
            raise ValueError("input sets differ in dimension")
        object.__setattr__(self, "input_sets", inputs)

    @property
    def n(self) -> int:
        return self.initial_set.dim

    @property
    def m(self) -> int:
        return self.input_sets[0].dim

    def input_at(self, k: int) -> Zonotope:
        return self.input_sets[0] if len(self.input_sets) == 1 else self.input_sets[k]


@dataclass(eq=False)
class ReachResult:
    method: str
    sets: list
    wall_times: list
    setup_seconds: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def total_seconds(self) -> float:
        return float(sum(self.wall_times))

    def hulls(self) -> list[Interval]:
        if "hulls" not in self.extras:
            self.extras["hulls"] = [cz_interval_hull(S) if isinstance(S, ConstrainedZonotope) else interval_hull(S) for S in self.sets]
        return self.extras["hulls"]


def _check_shape(shape, cfg: ReachConfig):
    if shape != (cfg.n, cfg.n + cfg.m):
        raise SetError(f"model set has shape {shape}, expected {(cfg.n, cfg.n + cfg.m)}")


def propagate_mz(M: MatrixZonotope, cfg: ReachConfig, method: str = "mz") -> ReachResult:
    _check_shape(M.shape, cfg)
    R = cfg.initial_set
    sets, times = [], []
    for k in range(cfg.horizon):
        t0 = time.perf_counter()
        R = zono_cartesian_product(R, cfg.input_at(k))
        R = zono_minkowski_sum(mz_times_zonotope(M, R), cfg.noise_set)
        R = zono_reduce_girard(R, cfg.reduction_order)
        times.append(time.perf_counter() - t0)
        sets.append(R)
    return ReachResult(method, sets, times)


def propagate_cmz(N: ConstrainedMatrixZonotope, cfg: ReachConfig, method: str = "auto") -> ReachResult:
    """Constrained-zonotope propagation.

    Coefficient bounds of ``N`` are computed once (2 LPs per coupled
    coefficient) and tracked through products, sums and reductions, so no
    LP is needed on the growing reachable sets.  Reduction touches only
    generators without constraint coupling.
    """
    _check_shape(N.shape, cfg)
    t0 = time.perf_counter()
    n_bounds = cz_coefficient_bounds(N.con_A, N.con_b, N.num_generators, method)
    setup = time.perf_counter() - t0
    R = ConstrainedZonotope.from_zonotope(cfg.initial_set)
    r_bounds = CoefficientBounds.box(R.num_generators)
    sets, times = [], []
    for k in range(cfg.horizon):
        t0 = time.perf_counter()
        U = cfg.input_at(k)
        R = cz_cartesian_product(R, U)
        r_bounds = CoefficientBounds.concat(r_bounds, CoefficientBounds.box(U.num_generators))
        R, r_bounds = cmz_step(N, R, cfg.noise_set, cfg.reduction_order, n_bounds, r_bounds)
        times.append(time.perf_counter() - t0)
        sets.append(R)
    # the bound LPs are part of the product operation, so they count as step time
    times[0] += setup
    return ReachResult("cmz", sets, times)


def cmz_step(N, Zc, W, order, n_bounds, z_bounds):
    """``reduce(cmz_times_cz(N, Zc) + W)`` without the dense zero constraint block.

    Produces the same set, generator order and tracked bounds as chaining
    :func:`cmz_times_cz`, :func:`cz_minkowski_sum` and
    :func:`cz_reduce_unconstrained`, but only materializes constraint columns
    of coupled generators (cross terms and noise generators never are).
    """
    n = N.shape[0]
    gN, gz = N.num_generators, Zc.num_generators
    G, C = N.generators, N.center
    cz, Gz = Zc.center, Zc.generators
    d = cross_term_scales(n_bounds, z_bounds)
    cross = (np.einsum("inm,mj->nij", G, Gz) * d[None, :, :]).reshape(n, -1)
    Gall = np.hstack([(G @ cz).T, C @ Gz, cross, W.generators])
    maskN = np.any(N.con_A != 0.0, axis=0) if N.num_constraints else np.zeros(gN, dtype=bool)
    maskZ = Zc.constrained_mask()
    cidx = np.concatenate([np.nonzero(maskN)[0], gN + np.nonzero(maskZ)[0]])
    A = np.zeros((N.num_constraints + Zc.num_constraints, cidx.size))
    kN = int(maskN.sum())
    A[: N.num_constraints, :kN] = N.con_A[:, maskN]
    A[N.num_constraints:, kN:] = Zc.con_A[:, maskZ]
    b = np.concatenate([N.con_b, Zc.con_b])
    unconstrained = np.ones(Gall.shape[1], dtype=bool)
    unconstrained[cidx] = False
    G_u = Gall[:, unconstrained]
    if G_u.shape[1] > order * n:
        kept, B = _girard_split(G_u, order)
        G_u = np.hstack([G_u[:, kept], B])
    out = ConstrainedZonotope(
        C @ cz + W.center,
        np.hstack([Gall[:, cidx], G_u]),
        np.hstack([A, np.zeros((A.shape[0], G_u.shape[1]))]),
        b,
        validate=False,
    )
    all_bounds = CoefficientBounds.concat(n_bounds, z_bounds)
    bounds = CoefficientBounds.concat(all_bounds.take(cidx), CoefficientBounds.box(G_u.shape[1]))
    return out, bounds


@dataclass(eq=False)
class NullspaceReachResult:
    result: ReachResult
    nmz: MatrixZonotope
    provenance: NmzProvenance


def nullspace_reachability(N: ConstrainedMatrixZonotope, cfg: ReachConfig, method: str = "auto") -> NullspaceReachResult:
    """Build the NMZ of ``N`` and propagate with it as an ordinary MZ.

    The NMZ construction (2 nu interval LPs) is reported as
    ``setup_seconds``; ``wall_times`` cover the propagation only.
    """
    _check_shape(N.shape, cfg)
    t0 = time.perf_counter()
    res = nullspace_matrix_zonotope(N, method)
    setup = time.perf_counter() - t0
    out = propagate_mz(res.nmz, cfg, "nmz")
    out.setup_seconds = setup
    return NullspaceReachResult(out, res.nmz, res.provenance)


def run_methods(methods, M: MatrixZonotope | None, N: ConstrainedMatrixZonotope | None, cfg: ReachConfig, method: str = "auto") -> dict:
    """Run the requested engines; returns ``{tag: ReachResult}`` in canonical order."""
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ValueError(f"unknown methods {sorted(unknown)}")
    out = {}
    for tag in METHODS:
        if tag not in methods:
            continue
        if tag == "mz":
            out[tag] = propagate_mz(M, cfg)
        elif tag == "cmz":
            out[tag] = propagate_cmz(N, cfg, method)
        else:
            nr = nullspace_reachability(N, cfg, method)
            nr.result.extras["provenance"] = nr.provenance
            out[tag] = nr.result
    return out


# --------------------------------------------------------------------------
# Containment audit
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StepAudit:
    step: int
    contained: int
    total: int
    max_residual: float
    hull_widths: tuple

    @property
    def fraction(self) -> float:
        return self.contained / self.total if self.total else 1.0


@dataclass(frozen=True)
class MethodAudit:
    method: str
    steps: tuple

    @property
    def all_contained(self) -> bool:
        return all(s.contained == s.total for s in self.steps)


def containment_audit(results, trajectories, tol: float = 1e-9, hulls: bool = True) -> list[MethodAudit]:
    """Fraction of simulated states ``x(k)`` (k = 1..N) inside ``R_k`` per method.

    ``trajectories`` holds state arrays of shape (N + 1, n) started inside
    the initial set; reference trajectories stand in for an exact reachable set.
    ``hulls=False`` skips the interval hulls (costly for constrained sets)
    and reports empty ``hull_widths``.
    """
    if isinstance(results, dict):
        results = list(results.values())
    out = []
    for res in results:
        steps = []
        for k, S in enumerate(res.sets):
            xs = np.array([np.asarray(traj)[k + 1] for traj in trajectories])
            r = cz_membership_residuals(S, xs) if len(xs) else np.zeros(0)
            widths = tuple(float(w) for w in res.hulls()[k].widths) if hulls else ()
            steps.append(StepAudit(k + 1, int(np.sum(r <= tol)), len(trajectories), float(np.max(r, initial=0.0)), widths))
        out.append(MethodAudit(res.method, tuple(steps)))
    return out
