"""Set representations and the set arithmetic needed for reachability.

Vector sets
    :class:`Zonotope`, :class:`Interval`, :class:`ConstrainedZonotope`.
Matrix sets
    :class:`MatrixZonotope`, :class:`ConstrainedMatrixZonotope`.

All sets are immutable: arrays are copied on construction and flagged
read-only.  Generator matrices store one generator per column; matrix
zonotope generators are stacked along the first axis (shape ``(gamma, n, m)``).
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

from . import lp
from .spectral import DEFAULT_REL_TOL

MEMBERSHIP_TOL = 1e-9


class SetError(ValueError):
    """Invalid set data (shape mismatch, empty coefficient set, ...)."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float).ravel()


def _gen_matrix(G, n: int) -> np.ndarray:
    if G is None:
        return np.zeros((n, 0))
    G = np.asarray(G, dtype=float)
    if G.ndim == 1:
        G = G.reshape(n, -1) if G.size else np.zeros((n, 0))
    if G.shape[0] != n:
        raise SetError(f"generator matrix has {G.shape[0]} rows, expected {n}")
    return G


def _constraints(A, b, gamma: int):
    if A is None or np.size(A) == 0:
        q = 0 if b is None else np.size(b)
        A = np.zeros((q, gamma))
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    b = np.zeros(A.shape[0]) if b is None else _vec(b)
    if A.shape[1] != gamma:
        raise SetError(f"constraint matrix has {A.shape[1]} columns, expected {gamma}")
    if A.shape[0] != b.size:
        raise SetError(f"constraint rows ({A.shape[0]}) and rhs length ({b.size}) differ")
    return A, b


# --------------------------------------------------------------------------
# Types
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Zonotope:
    """``{c + G xi : ||xi||_inf <= 1}``."""

    center: np.ndarray
    generators: np.ndarray | None = None

    def __post_init__(self):
        c = _vec(self.center)
        object.__setattr__(self, "center", _frozen(c))
        object.__setattr__(self, "generators", _frozen(_gen_matrix(self.generators, c.size)))

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def num_generators(self) -> int:
        return self.generators.shape[1]

    @classmethod
    def singleton(cls, point) -> "Zonotope":
        return cls(point, None)

    def __repr__(self):
        return f"Zonotope(dim={self.dim}, generators={self.num_generators})"


@dataclass(frozen=True, eq=False)
class Interval:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, hi = _vec(self.lower), _vec(self.upper)
        if lo.shape != hi.shape:
            raise SetError("interval bounds differ in length")
        if np.any(lo > hi):
            raise SetError("interval lower bound exceeds upper bound")
        object.__setattr__(self, "lower", _frozen(lo))
        object.__setattr__(self, "upper", _frozen(hi))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def center(self) -> np.ndarray:
        return (self.lower + self.upper) / 2.0

    @property
    def radius(self) -> np.ndarray:
        return (self.upper - self.lower) / 2.0

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, other: "Interval", tol: float = 0.0) -> bool:
        return bool(np.all(self.lower <= other.lower + tol) and np.all(self.upper >= other.upper - tol))


@dataclass(frozen=True)
class CoefficientBounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, hi = _vec(self.lower), _vec(self.upper)
        if lo.shape != hi.shape:
            raise SetError("coefficient bounds differ in length")
        if np.any(lo < -1 - 1e-9) or np.any(hi > 1 + 1e-9) or np.any(lo > hi + 1e-9):
            raise SetError("coefficient bounds must satisfy -1 <= lower <= upper <= 1")
        object.__setattr__(self, "lower", _frozen(np.clip(lo, -1.0, 1.0)))
        object.__setattr__(self, "upper", _frozen(np.clip(np.maximum(hi, lo), -1.0, 1.0)))

    @classmethod
    def box(cls, gamma: int) -> "CoefficientBounds":
        return cls(-np.ones(gamma), np.ones(gamma))

    @classmethod
    def concat(cls, *parts: "CoefficientBounds") -> "CoefficientBounds":
        return cls(np.concatenate([p.lower for p in parts]), np.concatenate([p.upper for p in parts]))

    def take(self, idx) -> "CoefficientBounds":
        return CoefficientBounds(self.lower[idx], self.upper[idx])

    def __len__(self):
        return self.lower.size


@dataclass(frozen=True, eq=False)
class ConstrainedZonotope:
    """``{c + G xi : A xi = b, ||xi||_inf <= 1}``.

    Nonemptiness of the coefficient set is checked with an LP unless
    ``validate=False`` (used internally when the operands already guarantee it).
    """

    center: np.ndarray
    generators: np.ndarray | None = None
    con_A: np.ndarray | None = None
    con_b: np.ndarray | None = None
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        c = _vec(self.center)
        G = _gen_matrix(self.generators, c.size)
        A, b = _constraints(self.con_A, self.con_b, G.shape[1])
        object.__setattr__(self, "center", _frozen(c))
        object.__setattr__(self, "generators", _frozen(G))
        object.__setattr__(self, "con_A", _frozen(A))
        object.__setattr__(self, "con_b", _frozen(b))
        if validate and A.shape[0] and not coefficient_set_feasible(A, b):
            raise SetError("constrained zonotope has an empty coefficient set")

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def num_generators(self) -> int:
        return self.generators.shape[1]

    @property
    def num_constraints(self) -> int:
        return self.con_A.shape[0]

    def constrained_mask(self) -> np.ndarray:
        """Generators whose coefficient appears in at least one constraint row."""
        if not self.num_constraints:
            return np.zeros(self.num_generators, dtype=bool)
        return np.any(self.con_A != 0.0, axis=0)

    @classmethod
    def from_zonotope(cls, Z: Zonotope) -> "ConstrainedZonotope":
        return cls(Z.center, Z.generators, validate=False)

    def __repr__(self):
        return f"ConstrainedZonotope(dim={self.dim}, generators={self.num_generators}, constraints={self.num_constraints})"


@dataclass(frozen=True, eq=False)
class MatrixZonotope:
    """``{C + sum_i xi_i G_i : ||xi||_inf <= 1}`` over n x m matrices."""

    center: np.ndarray
    generators: np.ndarray | None = None

    def __post_init__(self):
        C = np.asarray(self.center, dtype=float)
        if C.ndim != 2:
            raise SetError("matrix zonotope center must be 2-D")
        G = _matrix_generators(self.generators, C.shape)
        object.__setattr__(self, "center", _frozen(C))
        object.__setattr__(self, "generators", _frozen(G))

    @property
    def shape(self) -> tuple[int, int]:
        return self.center.shape

    @property
    def num_generators(self) -> int:
        return self.generators.shape[0]

    def __repr__(self):
        return f"MatrixZonotope(shape={self.shape}, generators={self.num_generators})"


@dataclass(frozen=True, eq=False)
class ConstrainedMatrixZonotope:
    """``{C + sum_i xi_i G_i : A xi = b, ||xi||_inf <= 1}`` over n x m matrices."""

    center: np.ndarray
    generators: np.ndarray | None = None
    con_A: np.ndarray | None = None
    con_b: np.ndarray | None = None
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        C = np.asarray(self.center, dtype=float)
        if C.ndim != 2:
            raise SetError("matrix zonotope center must be 2-D")
        G = _matrix_generators(self.generators, C.shape)
        A, b = _constraints(self.con_A, self.con_b, G.shape[0])
        object.__setattr__(self, "center", _frozen(C))
        object.__setattr__(self, "generators", _frozen(G))
        object.__setattr__(self, "con_A", _frozen(A))
        object.__setattr__(self, "con_b", _frozen(b))
        if validate and A.shape[0] and not coefficient_set_feasible(A, b):
            raise SetError("constrained matrix zonotope has an empty coefficient set")

    @property
    def shape(self) -> tuple[int, int]:
        return self.center.shape

    @property
    def num_generators(self) -> int:
        return self.generators.shape[0]

    @property
    def num_constraints(self) -> int:
        return self.con_A.shape[0]

    def without_constraints(self) -> MatrixZonotope:
        return MatrixZonotope(self.center, self.generators)

    @classmethod
    def from_matrix_zonotope(cls, M: MatrixZonotope) -> "ConstrainedMatrixZonotope":
        return cls(M.center, M.generators, validate=False)

    def __repr__(self):
        return f"ConstrainedMatrixZonotope(shape={self.shape}, generators={self.num_generators}, constraints={self.num_constraints})"


def _matrix_generators(G, shape) -> np.ndarray:
    if G is None:
        return np.zeros((0,) + tuple(shape))
    if isinstance(G, (list, tuple)):
        if not G:
            return np.zeros((0,) + tuple(shape))
        G = np.stack([np.asarray(g, dtype=float) for g in G])
    G = np.asarray(G, dtype=float)
    if G.ndim == 2 and G.shape == tuple(shape):
        G = G[None]
    if G.ndim != 3 or G.shape[1:] != tuple(shape):
        raise SetError(f"generators must share the center shape {tuple(shape)}, got {G.shape}")
    return G


# --------------------------------------------------------------------------
# Coefficient-space LPs
# --------------------------------------------------------------------------


def compress_constraints(A, b, rel_tol: float = DEFAULT_REL_TOL, consistency_tol: float = 1e-9):
    """Replace ``A xi = b`` by an equivalent full-row-rank system.

    Returns ``(A', b')`` with orthonormal rows, or ``None`` when ``b`` has a
    component outside the range of ``A`` (the system is inconsistent).
    """
    A = np.asarray(A, dtype=float)
    b = _vec(b)
    if A.shape[0] == 0:
        return A, b
    U, S, Vt = np.linalg.svd(A, full_matrices=False)
    if S.size == 0 or S[0] == 0.0:
        r = 0
    else:
        r = int(np.sum(S > rel_tol * max(A.shape) * S[0]))
    Ur = U[:, :r]
    resid = b - Ur @ (Ur.T @ b)
    if np.max(np.abs(resid), initial=0.0) > consistency_tol * (1.0 + np.max(np.abs(b))):
        return None
    # rows of diag(S_r) V_r^T, scaled to unit norm: Vr^T xi = S_r^-1 Ur^T b
    return Vt[:r].copy(), (Ur.T @ b) / S[:r]


def coefficient_set_feasible(A, b) -> bool:
    """Is ``{xi : A xi = b, ||xi||_inf <= 1}`` nonempty?"""
    A = np.asarray(A, dtype=float)
    gamma = A.shape[1]
    comp = compress_constraints(A, b)
    if comp is None:
        return False
    Ac, bc = comp
    if Ac.shape[0] == 0:
        return True
    prog = lp.LinearProgram(np.zeros(gamma), eq_A=Ac, eq_b=bc, var_lower=-np.ones(gamma), var_upper=np.ones(gamma))
    sol = lp.solve_lp(prog, method="auto")
    if sol.status is lp.LpStatus.OPTIMAL:
        return True
    if sol.status is lp.LpStatus.INFEASIBLE:
        return False
    raise lp.LpError(f"feasibility LP ended with status {sol.status.value}")


def cz_coefficient_bounds(con_A, con_b, gamma: int, method: str = "auto") -> CoefficientBounds:
    """Per-coordinate min/max of ``xi`` over ``{A xi = b, ||xi||_inf <= 1}``.

    Coordinates with an all-zero constraint column are decoupled and keep the
    full range ``[-1, 1]``; every other coordinate costs two LPs.
    """
    A, b = _constraints(con_A, con_b, gamma)
    lower, upper = -np.ones(gamma), np.ones(gamma)
    if A.shape[0] == 0:
        return CoefficientBounds(lower, upper)
    comp = compress_constraints(A, b)
    if comp is None:
        raise SetError("coefficient set is empty (inconsistent equality constraints)")
    Ac, bc = comp
    coupled = np.nonzero(np.any(A != 0.0, axis=0))[0]
    objectives = [np.eye(gamma)[i] for i in coupled for _ in range(2)]
    senses = ["min", "max"] * coupled.size
    prog = lp.LinearProgram(np.zeros(gamma), eq_A=Ac, eq_b=bc, var_lower=-np.ones(gamma), var_upper=np.ones(gamma))
    sols = lp.solve_lp_batch(prog, objectives, senses, method)
    for k, sol in enumerate(sols):
        if sol.status is lp.LpStatus.INFEASIBLE:
            raise SetError("coefficient set is empty")
        if not sol.optimal:
            raise lp.LpError(f"coefficient bound LP ended with status {sol.status.value}")
        i = coupled[k // 2]
        if k % 2 == 0:
            lower[i] = sol.objective_value
        else:
            upper[i] = sol.objective_value
    return CoefficientBounds(np.clip(lower, -1, 1), np.clip(upper, -1, 1))


class MembershipError(RuntimeError):
    """The membership LP failed; distinct from a negative answer."""


def _polish(M: np.ndarray, rhs: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Least-squares correction of ``xi`` on coordinates not at their bounds."""
    free = np.abs(xi) < 1.0 - 1e-9
    if not np.any(free):
        return xi
    r = rhs - M @ xi
    delta = np.linalg.lstsq(M[:, free], r, rcond=None)[0]
    out = xi.copy()
    out[free] += delta
    return np.clip(out, -1.0, 1.0)


def cz_membership_residual(Zc: ConstrainedZonotope, point, method: str = "auto") -> float:
    """Smallest achievable ``max(|G xi - (p - c)|, |A xi - b|)`` over the box."""
    return float(cz_membership_residuals(Zc, [point], method)[0])


def cz_membership_residuals(Zc: ConstrainedZonotope, points, method: str = "auto") -> np.ndarray:
    """:func:`cz_membership_residual` for many points, compressing the constraints once."""
    if isinstance(Zc, Zonotope):
        Zc = ConstrainedZonotope.from_zonotope(Zc)
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[1] != Zc.dim:
        raise SetError(f"points have dimension {P.shape[1]}, set has {Zc.dim}")
    G, A, b = Zc.generators, Zc.con_A, Zc.con_b
    g = Zc.num_generators
    if g == 0:
        return np.max(np.abs(P - Zc.center), axis=1, initial=0.0)
    n = Zc.dim
    if A.shape[0]:
        comp = compress_constraints(A, b)
        if comp is None:
            return np.full(len(P), np.inf)
        Ac, bc = comp
        eq_A = np.hstack([Ac, np.zeros((Ac.shape[0], 1))])
        eq_b = bc
    else:
        eq_A, eq_b = None, None
    # variables [xi, r]: min r  s.t. |G xi - target| <= r, A xi = b, |xi| <= 1
    ineq_A = np.vstack([np.hstack([G, -np.ones((n, 1))]), np.hstack([-G, -np.ones((n, 1))])])
    cost = np.zeros(g + 1)
    cost[-1] = 1.0
    lower = np.concatenate([-np.ones(g), [0.0]])
    upper = np.concatenate([np.ones(g), [np.inf]])
    M = np.vstack([G, A]) if A.shape[0] else G
    out = np.empty(len(P))
    for k, p in enumerate(P):
        target = p - Zc.center
        prog = lp.LinearProgram(
            cost, eq_A=eq_A, eq_b=eq_b, ineq_A=ineq_A, ineq_b=np.concatenate([target, -target]),
            var_lower=lower, var_upper=upper,
        )
        sol = lp.solve_lp(prog, method)
        if sol.status is lp.LpStatus.INFEASIBLE:
            out[k] = np.inf
            continue
        if sol.status is not lp.LpStatus.OPTIMAL:
            raise MembershipError(f"membership LP ended with status {sol.status.value}")
        rhs = np.concatenate([target, b]) if A.shape[0] else target
        xi = np.clip(sol.x[:g], -1.0, 1.0)
        res = np.max(np.abs(M @ xi - rhs), initial=0.0)
        if res > 1e-12:
            res = min(res, np.max(np.abs(M @ _polish(M, rhs, xi) - rhs), initial=0.0))
        out[k] = res
    return out


def cz_membership(Zc: ConstrainedZonotope, point, tol: float = MEMBERSHIP_TOL, method: str = "auto") -> bool:
    """Is ``point`` in ``Zc`` up to an absolute residual of ``tol``?"""
    return cz_membership_residual(Zc, point, method) <= tol


def zono_membership(Z: Zonotope, point, tol: float = MEMBERSHIP_TOL, method: str = "auto") -> bool:
    return cz_membership(ConstrainedZonotope.from_zonotope(Z), point, tol, method)


# --------------------------------------------------------------------------
# Zonotope operations
# --------------------------------------------------------------------------


def zono_linear_map(R, Z: Zonotope) -> Zonotope:
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.shape[1] != Z.dim:
        raise SetError(f"map has {R.shape[1]} columns, zonotope dimension is {Z.dim}")
    return Zonotope(R @ Z.center, R @ Z.generators)


def zono_minkowski_sum(Z1: Zonotope, Z2: Zonotope) -> Zonotope:
    if Z1.dim != Z2.dim:
        raise SetError(f"dimension mismatch {Z1.dim} vs {Z2.dim}")
    return Zonotope(Z1.center + Z2.center, np.hstack([Z1.generators, Z2.generators]))


def zono_cartesian_product(Z1: Zonotope, Z2: Zonotope) -> Zonotope:
    G = np.zeros((Z1.dim + Z2.dim, Z1.num_generators + Z2.num_generators))
    G[: Z1.dim, : Z1.num_generators] = Z1.generators
    G[Z1.dim:, Z1.num_generators:] = Z2.generators
    return Zonotope(np.concatenate([Z1.center, Z2.center]), G)


def _girard_split(G: np.ndarray, order: int):
    """Indices of generators kept verbatim, and the box replacing the rest."""
    n, gamma = G.shape
    keep_count = max(order * n - n, 0)
    score = np.sum(np.abs(G), axis=0) - np.max(np.abs(G), axis=0, initial=0.0)
    ranked = np.argsort(score, kind="stable")  # ascending; ties keep original order
    boxed = ranked[: gamma - keep_count]
    kept = np.sort(ranked[gamma - keep_count:])
    box = np.sum(np.abs(G[:, boxed]), axis=1)
    B = np.diag(box)[:, box > 0.0]
    return kept, B


def zono_reduce_girard(Z: Zonotope, order: int) -> Zonotope:
    """Girard order reduction to at most ``order * n`` generators.

    The generators with the smallest ``||g||_1 - ||g||_inf`` are replaced by
    the axis-aligned box that encloses their sum.
    """
    if order < 1:
        raise SetError("reduction order must be >= 1")
    n, gamma = Z.generators.shape
    if gamma <= order * n:
        return Z
    kept, B = _girard_split(Z.generators, order)
    return Zonotope(Z.center, np.hstack([Z.generators[:, kept], B]))


def interval_hull(Z: Zonotope) -> Interval:
    r = np.sum(np.abs(Z.generators), axis=1)
    return Interval(Z.center - r, Z.center + r)


def zonotope_polygon(Z: Zonotope) -> np.ndarray:
    """Vertices of a 2-D zonotope in counter-clockwise order (rows)."""
    if Z.dim != 2:
        raise SetError("polygon vertices need a 2-D zonotope")
    G = Z.generators[:, np.linalg.norm(Z.generators, axis=0) > 0]
    if G.shape[1] == 0:
        return Z.center[None, :].copy()
    # flip into the upper half plane, then walk generators by angle
    flip = (G[1] < 0) | ((G[1] == 0) & (G[0] < 0))
    G = np.where(flip[None, :], -G, G)
    G = G[:, np.argsort(np.arctan2(G[1], G[0]), kind="stable")]
    start = Z.center - G.sum(axis=1)
    steps = np.hstack([2 * G, -2 * G])
    return start + np.vstack([np.zeros(2), np.cumsum(steps.T, axis=0)[:-1]])


def sample_zonotope(Z: Zonotope, count: int, rng: np.random.Generator, vertices: int = 0) -> np.ndarray:
    """Points ``c + G xi`` with ``xi`` uniform in the box (rows of the result).

    ``vertices`` extra samples use random sign vectors, i.e. extreme points.
    """
    g = Z.num_generators
    xi = rng.uniform(-1.0, 1.0, size=(count, g))
    if vertices:
        xi = np.vstack([xi, rng.choice([-1.0, 1.0], size=(vertices, g))])
    return Z.center[None, :] + xi @ Z.generators.T


# --------------------------------------------------------------------------
# Constrained zonotope operations
# --------------------------------------------------------------------------


def _as_cz(S) -> ConstrainedZonotope:
    if isinstance(S, ConstrainedZonotope):
        return S
    if isinstance(S, Zonotope):
        return ConstrainedZonotope.from_zonotope(S)
    raise TypeError(f"expected a zonotope or constrained zonotope, got {type(S).__name__}")


def cz_linear_map(R, Zc: ConstrainedZonotope) -> ConstrainedZonotope:
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.shape[1] != Zc.dim:
        raise SetError(f"map has {R.shape[1]} columns, set dimension is {Zc.dim}")
    return ConstrainedZonotope(R @ Zc.center, R @ Zc.generators, Zc.con_A, Zc.con_b, validate=False)


def cz_minkowski_sum(Z1, Z2) -> ConstrainedZonotope:
    Z1, Z2 = _as_cz(Z1), _as_cz(Z2)
    if Z1.dim != Z2.dim:
        raise SetError(f"dimension mismatch {Z1.dim} vs {Z2.dim}")
    A = _blkdiag(Z1.con_A, Z2.con_A)
    return ConstrainedZonotope(
        Z1.center + Z2.center,
        np.hstack([Z1.generators, Z2.generators]),
        A,
        np.concatenate([Z1.con_b, Z2.con_b]),
        validate=False,
    )


def cz_cartesian_product(Z1, Z2) -> ConstrainedZonotope:
    Z1, Z2 = _as_cz(Z1), _as_cz(Z2)
    G = _blkdiag(Z1.generators, Z2.generators)
    A = _blkdiag(Z1.con_A, Z2.con_A)
    return ConstrainedZonotope(np.concatenate([Z1.center, Z2.center]), G, A, np.concatenate([Z1.con_b, Z2.con_b]), validate=False)


def _blkdiag(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    out = np.zeros((A.shape[0] + B.shape[0], A.shape[1] + B.shape[1]))
    out[: A.shape[0], : A.shape[1]] = A
    out[A.shape[0]:, A.shape[1]:] = B
    return out


def cz_reduce_unconstrained(Zc: ConstrainedZonotope, order: int):
    """Girard-reduce only the generators whose coefficients are unconstrained.

    Returns ``(reduced, constrained_idx)``: the reduced set lists the
    constrained generators first (original order, constraint columns kept),
    followed by the reduced unconstrained part.  ``constrained_idx`` indexes
    the constrained generators in ``Zc``.
    """
    if order < 1:
        raise SetError("reduction order must be >= 1")
    mask = Zc.constrained_mask()
    cidx = np.nonzero(mask)[0]
    uidx = np.nonzero(~mask)[0]
    n = Zc.dim
    G_u = Zc.generators[:, uidx]
    if uidx.size > order * n:
        kept, B = _girard_split(G_u, order)
        G_u = np.hstack([G_u[:, kept], B])
    G = np.hstack([Zc.generators[:, cidx], G_u])
    A = np.hstack([Zc.con_A[:, cidx], np.zeros((Zc.num_constraints, G_u.shape[1]))])
    return ConstrainedZonotope(Zc.center, G, A, Zc.con_b, validate=False), cidx


def cz_interval_hull(Zc, method: str = "auto") -> Interval:
    """Tightest axis-aligned box, by 2n LPs when constraints are present."""
    Zc = _as_cz(Zc)
    if Zc.num_constraints == 0 or not np.any(Zc.constrained_mask()):
        return interval_hull(Zonotope(Zc.center, Zc.generators))
    comp = compress_constraints(Zc.con_A, Zc.con_b)
    if comp is None:
        raise SetError("constrained zonotope is empty")
    Ac, bc = comp
    g = Zc.num_generators
    prog = lp.LinearProgram(np.zeros(g), eq_A=Ac, eq_b=bc, var_lower=-np.ones(g), var_upper=np.ones(g))
    objectives = [Zc.generators[k] for k in range(Zc.dim) for _ in range(2)]
    sols = lp.solve_lp_batch(prog, objectives, ["min", "max"] * Zc.dim, method)
    vals = np.empty(2 * Zc.dim)
    for k, sol in enumerate(sols):
        if not sol.optimal:
            raise lp.LpError(f"interval hull LP ended with status {sol.status.value}")
        vals[k] = sol.objective_value
    lo = Zc.center + vals[0::2]
    hi = Zc.center + vals[1::2]
    return Interval(lo, np.maximum(hi, lo))


# --------------------------------------------------------------------------
# Matrix zonotope operations
# --------------------------------------------------------------------------


def mz_sample(M, coeffs, tol: float = 1e-12) -> np.ndarray:
    """``C + sum_i coeffs_i G_i`` for a (constrained) matrix zonotope."""
    xi = _vec(coeffs)
    if xi.size != M.num_generators:
        raise SetError(f"expected {M.num_generators} coefficients, got {xi.size}")
    if xi.size and np.max(np.abs(xi)) > 1.0 + tol:
        raise SetError("coefficient vector outside the unit box")
    if xi.size == 0:
        return np.array(M.center)
    return M.center + np.tensordot(xi, M.generators, axes=1)


def mz_times_zonotope(M: MatrixZonotope, Z: Zonotope) -> Zonotope:
    """Enclosure of ``{A x : A in M, x in Z}``.

    Generators are ``G_i c``, ``C g_j`` and the cross terms ``G_i g_j``; the
    product of two box coefficients stays in ``[-1, 1]``.
    """
    n, m = M.shape
    if m != Z.dim:
        raise SetError(f"matrix zonotope has {m} columns, zonotope dimension is {Z.dim}")
    G, C = M.generators, M.center
    c, Gz = Z.center, Z.generators
    parts = [
        (G @ c).T,  # (n, gamma)
        C @ Gz,
        np.einsum("inm,mj->nij", G, Gz).reshape(n, -1),
    ]
    return Zonotope(C @ c, np.hstack(parts))


def matrix_times_cmz(R, N: ConstrainedMatrixZonotope) -> ConstrainedMatrixZonotope:
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.shape[1] != N.shape[0]:
        raise SetError(f"matrix has {R.shape[1]} columns, CMZ has {N.shape[0]} rows")
    G = np.einsum("kn,inm->ikm", R, N.generators)
    return ConstrainedMatrixZonotope(R @ N.center, G, N.con_A, N.con_b, validate=False)


def cross_term_scales(bN: CoefficientBounds, bz: CoefficientBounds) -> np.ndarray:
    """``d_ij`` = largest |product| over the four corner pairs of the bounds."""
    lN, uN = bN.lower[:, None], bN.upper[:, None]
    lz, uz = bz.lower[None, :], bz.upper[None, :]
    return np.maximum.reduce([np.abs(lN * lz), np.abs(uN * uz), np.abs(uN * lz), np.abs(lN * uz)])


def cmz_times_cz(
    N: ConstrainedMatrixZonotope,
    Zc,
    n_bounds: CoefficientBounds | None = None,
    z_bounds: CoefficientBounds | None = None,
    method: str = "auto",
) -> ConstrainedZonotope:
    """Constrained-zonotope enclosure of ``{A x : A in N, x in Zc}``.

    Coefficient bounds of ``N`` and ``Zc`` are computed by LP unless supplied
    (callers that track them through propagation pass them in).  Generator
    layout: ``[G_i c_z | C G_z | G_f]`` with cross generators ordered by
    matrix generator first.
    """
    Zc = _as_cz(Zc)
    n, m = N.shape
    if m != Zc.dim:
        raise SetError(f"CMZ has {m} columns, set dimension is {Zc.dim}")
    gN, gz = N.num_generators, Zc.num_generators
    if n_bounds is None:
        n_bounds = cz_coefficient_bounds(N.con_A, N.con_b, gN, method)
    if z_bounds is None:
        z_bounds = cz_coefficient_bounds(Zc.con_A, Zc.con_b, gz, method)
    if len(n_bounds) != gN or len(z_bounds) != gz:
        raise SetError("coefficient bounds do not match generator counts")
    G, C = N.generators, N.center
    cz, Gz = Zc.center, Zc.generators
    d = cross_term_scales(n_bounds, z_bounds)
    cross = np.einsum("inm,mj->nij", G, Gz) * d[None, :, :]
    Gbar = np.hstack([(G @ cz).T, C @ Gz, cross.reshape(n, -1)])
    Abar = _blkdiag(N.con_A, Zc.con_A)
    Abar = np.hstack([Abar, np.zeros((Abar.shape[0], gN * gz))])
    bbar = np.concatenate([N.con_b, Zc.con_b])
    return ConstrainedZonotope(C @ cz, Gbar, Abar, bbar, validate=False)


def product_bounds(n_bounds: CoefficientBounds, z_bounds: CoefficientBounds) -> CoefficientBounds:
    """Coefficient bounds of a :func:`cmz_times_cz` result.

    The constraint matrix is block diagonal, so per-coordinate bounds of each
    block carry over unchanged; cross-generator coefficients are free.
    """
    return CoefficientBounds.concat(n_bounds, z_bounds, CoefficientBounds.box(len(n_bounds) * len(z_bounds)))
