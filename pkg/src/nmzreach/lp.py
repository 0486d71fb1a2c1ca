"""Dense linear programming.

Contents
--------
* :func:`solve_lp` -- two-phase tableau simplex (Dantzig pricing, Bland's rule
  once degenerate pivots start repeating), with an optional HiGHS backend for
  the large membership/bounding programs that reachability produces.
* :func:`enumerate_vertices` -- brute-force basic-feasible-solution
  enumeration, used as an independent test oracle.
* :func:`charnes_cooper_max_ratio` and :func:`check_denominator_positive` --
  maximization of ``mu^T|xi| / (sigma - gamma^T|xi|)`` (resp. ``gamma^T|xi|``)
  over ``{A xi = b, ||xi||_inf <= 1}``.

The objective of the fractional program is a nondecreasing function of
``|xi|`` and therefore quasiconvex in ``xi``; a single LP over the split
``xi = xi_plus - xi_minus`` is only a relaxation of it.  The solver below keeps
the split but fixes signs coordinate by coordinate in a best-first
branch-and-bound.  Each node is one Charnes-Cooper LP, and on a node whose
relaxed optimum is already complementary the LP value is exact.
"""

from __future__ import annotations

import enum
import heapq
import itertools
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linprog

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8
SIMPLEX_MAX_CELLS = 60_000


class LpError(RuntimeError):
    """The solver failed (iteration cap, numerical breakdown, bad input)."""


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class LinearProgram:
    """``min/max c^T x`` s.t. ``eq_A x = eq_b``, ``ineq_A x <= ineq_b``, bounds.

    Missing bounds mean the variable is free in that direction; use
    ``var_lower=np.zeros(d)`` for the textbook ``x >= 0``.
    """

    objective: np.ndarray
    sense: str = "min"
    eq_A: np.ndarray | None = None
    eq_b: np.ndarray | None = None
    ineq_A: np.ndarray | None = None
    ineq_b: np.ndarray | None = None
    var_lower: np.ndarray | None = None
    var_upper: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        d = c.size
        object.__setattr__(self, "objective", c)
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        for A_name, b_name in (("eq_A", "eq_b"), ("ineq_A", "ineq_b")):
            A = getattr(self, A_name)
            b = getattr(self, b_name)
            b = None if b is None else np.asarray(b, dtype=float).ravel()
            if A is None:
                A = np.zeros((0 if b is None else b.size, d))
            else:
                A = np.asarray(A, dtype=float)
                A = A.reshape(-1, d) if d else A.reshape(A.shape[0] if A.ndim == 2 else 0, 0)
            if b is None:
                b = np.zeros(A.shape[0])
            if A.shape[0] != b.size:
                raise ValueError(f"{A_name} has {A.shape[0]} rows but {b_name} has {b.size} entries")
            object.__setattr__(self, A_name, A)
            object.__setattr__(self, b_name, b)
        lo = np.full(d, -np.inf) if self.var_lower is None else np.asarray(self.var_lower, dtype=float).ravel()
        hi = np.full(d, np.inf) if self.var_upper is None else np.asarray(self.var_upper, dtype=float).ravel()
        if lo.size != d or hi.size != d:
            raise ValueError("bound vectors must match the objective length")
        if np.any(lo > hi):
            raise ValueError("var_lower exceeds var_upper")
        object.__setattr__(self, "var_lower", lo)
        object.__setattr__(self, "var_upper", hi)

    @property
    def dim(self) -> int:
        return self.objective.size

    def max_violation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        v = 0.0
        if self.eq_A.shape[0]:
            v = max(v, float(np.max(np.abs(self.eq_A @ x - self.eq_b))))
        if self.ineq_A.shape[0]:
            v = max(v, float(np.max(self.ineq_A @ x - self.ineq_b)))
        v = max(v, float(np.max(self.var_lower - x, initial=0.0)), float(np.max(x - self.var_upper, initial=0.0)))
        return v


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective_value: float = np.nan
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


# --------------------------------------------------------------------------
# Standard-form conversion
# --------------------------------------------------------------------------


@dataclass
class _StandardForm:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    const: float
    x0: np.ndarray
    T: np.ndarray  # x = x0 + T @ z[:nz]
    nz: int
    slack_rows: dict = field(default_factory=dict)  # row -> slack column


def _row_scale(A: np.ndarray) -> np.ndarray:
    s = np.max(np.abs(A), axis=1) if A.shape[1] else np.ones(A.shape[0])
    s[s == 0.0] = 1.0
    return s


def _to_standard(p: LinearProgram) -> _StandardForm:
    """Standard form ``A z = b, z >= 0`` with rows equilibrated to unit max-norm,
    so the absolute pivot tolerance means the same thing on every row."""
    d = p.dim
    lo, hi = p.var_lower, p.var_upper
    x0 = np.zeros(d)
    cols = []  # (var index, sign)
    upper_rows = []  # (z column, width)
    for j in range(d):
        if np.isfinite(lo[j]):
            x0[j] = lo[j]
            cols.append((j, 1.0))
            if np.isfinite(hi[j]):
                upper_rows.append((len(cols) - 1, hi[j] - lo[j]))
        elif np.isfinite(hi[j]):
            x0[j] = hi[j]
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    nz = len(cols)
    T = np.zeros((d, nz))
    for k, (j, s) in enumerate(cols):
        T[j, k] = s
    m_eq = p.eq_A.shape[0]
    m_in = p.ineq_A.shape[0]
    m_up = len(upper_rows)
    n_slack = m_in + m_up
    m = m_eq + m_in + m_up
    A = np.zeros((m, nz + n_slack))
    b = np.zeros(m)
    if m_eq:
        se = _row_scale(p.eq_A)
        A[:m_eq, :nz] = (p.eq_A / se[:, None]) @ T
        b[:m_eq] = (p.eq_b - p.eq_A @ x0) / se
    slack_rows = {}
    if m_in:
        si = _row_scale(p.ineq_A)
        A[m_eq:m_eq + m_in, :nz] = (p.ineq_A / si[:, None]) @ T
        A[m_eq:m_eq + m_in, nz:nz + m_in] = np.eye(m_in)
        b[m_eq:m_eq + m_in] = (p.ineq_b - p.ineq_A @ x0) / si
        for i in range(m_in):
            slack_rows[m_eq + i] = nz + i
    for k, (zc, width) in enumerate(upper_rows):
        r = m_eq + m_in + k
        A[r, zc] = 1.0
        A[r, nz + m_in + k] = 1.0
        b[r] = width
        slack_rows[r] = nz + m_in + k
    c = p.objective if p.sense == "min" else -p.objective
    c_std = np.concatenate([c @ T, np.zeros(n_slack)])
    return _StandardForm(A, b, c_std, float(c @ x0), x0, T, nz, slack_rows)


# --------------------------------------------------------------------------
# Tableau simplex
# --------------------------------------------------------------------------


class _Tableau:
    def __init__(self, A, b, basis):
        m, n = A.shape
        self.M = np.zeros((m + 1, n + 1))
        self.M[:m, :n] = A
        self.M[:m, n] = b
        self.basis = list(basis)
        self.iterations = 0

    @property
    def m(self):
        return self.M.shape[0] - 1

    def set_cost(self, c):
        n = self.M.shape[1] - 1
        self.M[-1, :n] = c
        self.M[-1, n] = 0.0
        for r, j in enumerate(self.basis):
            if self.M[-1, j] != 0.0:
                self.M[-1] -= self.M[-1, j] * self.M[r]

    def pivot(self, r, j):
        M = self.M
        M[r] /= M[r, j]
        col = M[:, j].copy()
        col[r] = 0.0
        M -= np.outer(col, M[r])
        self.basis[r] = j
        self.iterations += 1

    def run(self, allowed: np.ndarray, max_iter: int) -> LpStatus:
        """Minimize the cost row over the columns flagged in ``allowed``."""
        M = self.M
        degenerate_streak = 0
        bland = False
        while True:
            if self.iterations >= max_iter:
                return LpStatus.ITERATION_LIMIT
            red = M[-1, :-1]
            cand = np.nonzero(allowed & (red < -PIVOT_TOL))[0]
            if cand.size == 0:
                return LpStatus.OPTIMAL
            j = int(cand[0]) if bland else int(cand[np.argmin(red[cand])])
            col = M[:-1, j]
            pos = np.nonzero(col > PIVOT_TOL)[0]
            if pos.size == 0:
                return LpStatus.UNBOUNDED
            ratios = M[pos, -1] / col[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            if best <= 1e-12:
                degenerate_streak += 1
                if degenerate_streak > 30:
                    bland = True
            else:
                degenerate_streak = 0
            self.pivot(r, j)


def _phase_one(p: LinearProgram, max_iter: int):
    """Feasible starting tableau for ``p`` (artificials removed), or a failure status."""
    sf = _to_standard(p)
    A, b = sf.A.copy(), sf.b.copy()
    m, n = A.shape
    slack_rows = dict(sf.slack_rows)
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    for r in np.nonzero(neg)[0]:
        slack_rows.pop(int(r), None)

    basis = []
    art_rows = []
    for r in range(m):
        if r in slack_rows:
            basis.append(slack_rows[r])
        else:
            basis.append(n + len(art_rows))
            art_rows.append(r)
    n_art = len(art_rows)
    A_full = np.zeros((m, n + n_art))
    A_full[:, :n] = A
    for k, r in enumerate(art_rows):
        A_full[r, n + k] = 1.0
    tab = _Tableau(A_full, b, basis)

    scale = 1.0 + (np.max(np.abs(b)) if b.size else 0.0)
    if n_art:
        c1 = np.zeros(n + n_art)
        c1[n:] = 1.0
        tab.set_cost(c1)
        status = tab.run(np.ones(n + n_art, dtype=bool), max_iter)
        if status is LpStatus.ITERATION_LIMIT:
            return sf, tab, status
        if -tab.M[-1, -1] > FEAS_TOL * scale:
            return sf, tab, LpStatus.INFEASIBLE
        # drive artificials out of the basis; drop redundant rows
        drop = []
        for r in range(m):
            if tab.basis[r] >= n:
                row = tab.M[r, :n]
                cand = np.nonzero(np.abs(row) > PIVOT_TOL)[0]
                if cand.size:
                    tab.pivot(r, int(cand[np.argmax(np.abs(row[cand]))]))
                else:
                    drop.append(r)
        if drop:
            keep = [r for r in range(m) if r not in drop]
            tab.M = np.vstack([tab.M[keep], tab.M[-1:]])
            tab.basis = [tab.basis[r] for r in keep]
        tab.M = np.hstack([tab.M[:, :n], tab.M[:, -1:]])
    return sf, tab, LpStatus.OPTIMAL


def _phase_two(p: LinearProgram, sf: _StandardForm, tab: _Tableau, c_std: np.ndarray, max_iter: int) -> LpSolution:
    n = tab.M.shape[1] - 1
    start = tab.iterations
    tab.set_cost(c_std)
    status = tab.run(np.ones(n, dtype=bool), start + max_iter)
    if status is not LpStatus.OPTIMAL:
        return LpSolution(status, iterations=tab.iterations - start)
    z = np.zeros(n)
    for r, j in enumerate(tab.basis):
        z[j] = tab.M[r, -1]
    x = sf.x0 + sf.T @ z[: sf.nz]
    return LpSolution(LpStatus.OPTIMAL, x, float(p.objective @ x), tab.iterations - start)


def _simplex(p: LinearProgram, max_iter: int) -> LpSolution:
    sf, tab, status = _phase_one(p, max_iter)
    if status is not LpStatus.OPTIMAL:
        return LpSolution(status, iterations=tab.iterations)
    return _phase_two(p, sf, tab, sf.c, max_iter)


def _highs(p: LinearProgram, max_iter: int) -> LpSolution:
    c = p.objective if p.sense == "min" else -p.objective
    bounds = [(None if not np.isfinite(l) else l, None if not np.isfinite(u) else u) for l, u in zip(p.var_lower, p.var_upper)]
    res = linprog(
        c,
        A_ub=p.ineq_A if p.ineq_A.shape[0] else None,
        b_ub=p.ineq_b if p.ineq_A.shape[0] else None,
        A_eq=p.eq_A if p.eq_A.shape[0] else None,
        b_eq=p.eq_b if p.eq_A.shape[0] else None,
        bounds=bounds,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-9, "dual_feasibility_tolerance": 1e-9, "maxiter": max_iter},
    )
    if res.status == 0:
        x = np.asarray(res.x, dtype=float)
        return LpSolution(LpStatus.OPTIMAL, x, float(p.objective @ x), int(getattr(res, "nit", 0)))
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE)
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED)
    if res.status == 1:
        return LpSolution(LpStatus.ITERATION_LIMIT)
    raise LpError(f"HiGHS failed: {res.message}")


def _standard_cells(p: LinearProgram) -> int:
    d = p.dim
    free = int(np.sum(~np.isfinite(p.var_lower) & ~np.isfinite(p.var_upper)))
    boxed = int(np.sum(np.isfinite(p.var_lower) & np.isfinite(p.var_upper)))
    rows = p.eq_A.shape[0] + p.ineq_A.shape[0] + boxed
    cols = d + free + p.ineq_A.shape[0] + boxed
    return rows * cols


_SUSPECT = (LpStatus.UNBOUNDED, LpStatus.ITERATION_LIMIT)


def _stall_cap(p: LinearProgram) -> int:
    d = p.dim
    rows = p.eq_A.shape[0] + p.ineq_A.shape[0] + d
    return max(1000, 20 * (rows + 2 * d + p.ineq_A.shape[0]))


def solve_lp(p: LinearProgram, method: str = "auto", max_iter: int = 50_000) -> LpSolution:
    """Solve ``p``.

    ``method`` is ``"simplex"`` (dense tableau), ``"highs"`` (SciPy/HiGHS) or
    ``"auto"``, which uses the simplex for small programs and HiGHS once the
    standard-form tableau exceeds ``SIMPLEX_MAX_CELLS`` entries.  Under
    ``"auto"`` an unbounded or stalled simplex run is re-solved with HiGHS,
    since on degenerate, badly scaled programs both verdicts can be
    artefacts of the tableau tolerances.
    """
    if method == "auto":
        if _standard_cells(p) > SIMPLEX_MAX_CELLS:
            return _highs(p, max_iter)
        sol = _simplex(p, min(max_iter, _stall_cap(p)))
        if sol.status in _SUSPECT:
            sol = _highs(p, max_iter)
        return sol
    if method == "simplex":
        return _simplex(p, max_iter)
    if method == "highs":
        return _highs(p, max_iter)
    raise ValueError(f"unknown LP method {method!r}")


def solve_lp_batch(p: LinearProgram, objectives, senses=None, method: str = "auto", max_iter: int = 50_000) -> list[LpSolution]:
    """Solve ``p`` for several objectives over the same feasible set.

    With the simplex backend phase one runs once and each objective is
    re-optimized from the previous optimal basis.  Every warm-started answer
    is checked for feasibility and re-solved from scratch (HiGHS) if the
    tableau has drifted.  ``"auto"`` picks the warm simplex for moderately
    sized programs with equality rows, where phase one dominates the cost,
    and HiGHS otherwise.
    """
    objectives = [np.asarray(c, dtype=float).ravel() for c in objectives]
    senses = ["min"] * len(objectives) if senses is None else list(senses)
    if len(senses) != len(objectives):
        raise ValueError("one sense per objective")
    fallback = method == "auto"
    if method == "auto":
        warm = p.eq_A.shape[0] > 0 and _standard_cells(p) <= 4 * SIMPLEX_MAX_CELLS
        method = "simplex" if warm else "highs"
        max_simplex = min(max_iter, _stall_cap(p))
    else:
        max_simplex = max_iter
    variants = [replace(p, objective=c, sense=s) for c, s in zip(objectives, senses)]
    if method == "highs":
        return [_highs(q, max_iter) for q in variants]
    if method != "simplex":
        raise ValueError(f"unknown LP method {method!r}")
    sf, tab, status = _phase_one(p, max_simplex)
    if status is not LpStatus.OPTIMAL:
        if fallback and status in _SUSPECT:
            return [_highs(q, max_iter) for q in variants]
        return [LpSolution(status, iterations=tab.iterations) for _ in variants]
    out = []
    scale = 1.0 + max(np.max(np.abs(p.eq_b), initial=0.0), np.max(np.abs(p.ineq_b), initial=0.0))
    for k, q in enumerate(variants):
        c = q.objective if q.sense == "min" else -q.objective
        c_std = np.concatenate([c @ sf.T, np.zeros(tab.M.shape[1] - 1 - sf.nz)])
        sol = _phase_two(q, sf, tab, c_std, max_simplex)
        if not sol.optimal or q.max_violation(sol.x) > FEAS_TOL * scale:
            sol = _highs(q, max_iter)
            sf, tab, status = _phase_one(p, max_simplex)
            if status is not LpStatus.OPTIMAL:
                # tableau unusable; finish the batch cold
                out.append(sol)
                out.extend(_highs(r, max_iter) for r in variants[k + 1:])
                return out
        out.append(sol)
    return out


# --------------------------------------------------------------------------
# Vertex enumeration oracle
# --------------------------------------------------------------------------


def enumerate_vertices(ineq_A=None, ineq_b=None, eq_A=None, eq_b=None, dim: int | None = None, tol: float = 1e-8) -> list[np.ndarray]:
    """All vertices of ``{x : ineq_A x <= ineq_b, eq_A x = eq_b}`` by brute force.

    Every choice of active inequality rows that, together with the equality
    rows, pins down a unique point is solved and kept if feasible.
    """
    mats = [M for M in (ineq_A, eq_A) if M is not None and np.size(M)]
    if dim is None:
        if not mats:
            raise ValueError("cannot infer dimension")
        dim = np.atleast_2d(mats[0]).shape[1]
    if dim > 12:
        raise ValueError(f"vertex enumeration limited to dimension <= 12, got {dim}")
    G = np.zeros((0, dim)) if ineq_A is None else np.asarray(ineq_A, dtype=float).reshape(-1, dim)
    h = np.zeros(0) if ineq_b is None else np.asarray(ineq_b, dtype=float).ravel()
    E = np.zeros((0, dim)) if eq_A is None else np.asarray(eq_A, dtype=float).reshape(-1, dim)
    f = np.zeros(0) if eq_b is None else np.asarray(eq_b, dtype=float).ravel()
    r_eq = np.linalg.matrix_rank(E) if E.shape[0] else 0
    need = dim - r_eq
    out: list[np.ndarray] = []
    if need < 0 or need > G.shape[0]:
        return out
    for S in itertools.combinations(range(G.shape[0]), need):
        M = np.vstack([E, G[list(S)]])
        rhs = np.concatenate([f, h[list(S)]])
        if np.linalg.matrix_rank(M) < dim:
            continue
        x = np.linalg.lstsq(M, rhs, rcond=None)[0]
        if E.shape[0] and np.max(np.abs(E @ x - f)) > tol:
            continue
        if G.shape[0] and np.max(G @ x - h) > tol:
            continue
        if not any(np.max(np.abs(x - v)) <= tol for v in out):
            out.append(x)
    return out


# --------------------------------------------------------------------------
# Maximization of functions of |xi| over {A xi = b, |xi| <= 1}
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FractionalResult:
    """Outcome of :func:`charnes_cooper_max_ratio`.

    ``ratio`` is the certified maximum when ``exact`` is true, otherwise
    ``upper_bound`` is a valid upper bound and ``ratio`` the best value found.
    """

    xi_max: np.ndarray
    ratio: float
    upper_bound: float
    exact: bool
    zero_numerator: bool = False
    nodes: int = 0


@dataclass(frozen=True)
class AbsLinearResult:
    xi_max: np.ndarray
    value: float
    upper_bound: float
    exact: bool
    nodes: int = 0


def _coerce_constraints(con_A, con_b, g: int):
    A = np.zeros((0, g)) if con_A is None else np.asarray(con_A, dtype=float).reshape(-1, g)
    b = np.zeros(A.shape[0]) if con_b is None else np.asarray(con_b, dtype=float).ravel()
    if b.size != A.shape[0]:
        raise ValueError("con_A and con_b disagree in row count")
    return A, b


def _sign_bounds(g: int, signs: dict, scale_var: bool):
    """Upper bounds on (xi+, xi-) [and t] implementing fixed signs."""
    up = np.full(2 * g + (1 if scale_var else 0), np.inf)
    for i, s in signs.items():
        if s > 0:
            up[g + i] = 0.0
        else:
            up[i] = 0.0
    return up


def _split_rows(g: int, with_t: bool):
    """Box rows of the lifted program: the ``[I -I; -I I]`` block and
    ``xi+ + xi- <= 1`` (both scaled by ``t`` when homogenized)."""
    I = np.eye(g)
    block = np.block([[I, -I], [-I, I]])
    summ = np.hstack([I, I])
    rows = np.vstack([block, summ])
    if with_t:
        return np.hstack([rows, -np.ones((3 * g, 1))]), np.zeros(3 * g)
    return rows, np.ones(3 * g)


def _complementarity_gap(w: np.ndarray, g: int, scale: float = 1.0):
    gap = np.minimum(w[:g], w[g:2 * g]) / scale
    return gap


def _region_feasible(A, b, g, signs, method) -> np.ndarray | None:
    rows, rhs = _split_rows(g, with_t=False)
    lp = LinearProgram(
        np.zeros(2 * g),
        eq_A=np.hstack([A, -A]) if A.shape[0] else None,
        eq_b=b if A.shape[0] else None,
        ineq_A=rows,
        ineq_b=rhs,
        var_lower=np.zeros(2 * g),
        var_upper=_sign_bounds(g, signs, False),
    )
    sol = solve_lp(lp, method)
    if sol.status is LpStatus.OPTIMAL:
        return sol.x[:g] - sol.x[g:]
    if sol.status is LpStatus.INFEASIBLE:
        return None
    raise LpError(f"region feasibility LP ended with status {sol.status.value}")


def _best_first(g, root_eval, node_limit, stop_at: float = np.inf):
    """Generic best-first branch-and-bound over sign fixings.

    ``root_eval(signs)`` returns ``None`` for an empty node or a tuple
    ``(upper, value, xi, branch_index)`` where ``branch_index`` is ``None``
    when the node relaxation is exact.  The search ends early once an
    incumbent reaches ``stop_at``.
    """
    counter = itertools.count()
    best_val, best_xi = -np.inf, None
    heap = []
    nodes = 0

    def push(signs):
        nonlocal best_val, best_xi, nodes
        nodes += 1
        res = root_eval(signs)
        if res is None:
            return
        upper, val, xi, j = res
        if val > best_val:
            best_val, best_xi = val, xi
        if j is not None and upper > best_val + 1e-10 * max(1.0, abs(best_val)):
            heapq.heappush(heap, (-upper, next(counter), signs, j))

    push({})
    while heap and best_val < stop_at:
        neg_up, _, signs, j = heap[0]
        if -neg_up <= best_val + 1e-10 * max(1.0, abs(best_val)):
            heapq.heappop(heap)
            continue
        if nodes >= node_limit:
            break
        heapq.heappop(heap)
        for s in (1, -1):
            child = dict(signs)
            child[j] = s
            push(child)
    open_upper = max((-h[0] for h in heap), default=-np.inf)
    exact = not heap or open_upper <= best_val + 1e-10 * max(1.0, abs(best_val))
    upper = max(best_val, open_upper)
    return best_val, best_xi, upper, exact, nodes


def max_abs_linear(weights, con_A=None, con_b=None, method: str = "auto", node_limit: int = 4096, stop_at: float = np.inf) -> AbsLinearResult:
    """Maximize ``weights^T |xi|`` over ``{con_A xi = con_b, ||xi||_inf <= 1}``.

    With a finite ``stop_at`` the search may end as soon as a feasible point
    reaches that value; the result is then a certificate, not the maximum.
    """
    w = np.asarray(weights, dtype=float).ravel()
    g = w.size
    A, b = _coerce_constraints(con_A, con_b, g)
    rows, rhs = _split_rows(g, with_t=False)
    eq_A = np.hstack([A, -A]) if A.shape[0] else None

    def evaluate(signs):
        lp = LinearProgram(
            np.concatenate([w, w]),
            sense="max",
            eq_A=eq_A,
            eq_b=b if A.shape[0] else None,
            ineq_A=rows,
            ineq_b=rhs,
            var_lower=np.zeros(2 * g),
            var_upper=_sign_bounds(g, signs, False),
        )
        sol = solve_lp(lp, method)
        if sol.status is LpStatus.INFEASIBLE:
            return None
        if sol.status is not LpStatus.OPTIMAL:
            raise LpError(f"abs-linear node LP ended with status {sol.status.value}")
        z = np.maximum(sol.x, 0.0)
        xi = np.clip(z[:g] - z[g:], -1.0, 1.0)
        val = float(w @ np.abs(xi))
        gap = _complementarity_gap(z, g)
        free = [i for i in range(g) if i not in signs and w[i] != 0.0]
        j = max(free, key=lambda i: gap[i]) if free else None
        if j is not None and gap[j] <= 1e-9:
            j = None
        return sol.objective_value, val, xi, j

    if g == 0:
        return AbsLinearResult(np.zeros(0), 0.0, 0.0, True, 0)
    val, xi, upper, exact, nodes = _best_first(g, evaluate, node_limit, stop_at)
    if xi is None:
        raise LpError("coefficient set {A xi = b, |xi| <= 1} is empty")
    return AbsLinearResult(xi, val, upper, exact, nodes)


def check_denominator_positive(gamma, sigma_min: float, con_A=None, con_b=None, method: str = "auto", node_limit: int = 4096) -> bool:
    """True when ``sigma_min - gamma^T|xi| > 0`` for every feasible ``xi``.

    Uses the certified upper bound of ``max gamma^T|xi|``, so an inexact
    search can only make the answer more conservative.
    """
    gamma = np.asarray(gamma, dtype=float).ravel()
    if np.all(gamma == 0.0):
        A, b = _coerce_constraints(con_A, con_b, gamma.size)
        if A.shape[0] and _region_feasible(A, b, gamma.size, {}, method) is None:
            raise LpError("coefficient set {A xi = b, |xi| <= 1} is empty")
        return sigma_min > 0.0
    if sigma_min - gamma.sum() > 0.0:
        # holds on the whole box; still reject an empty coefficient set
        A, b = _coerce_constraints(con_A, con_b, gamma.size)
        if A.shape[0] and _region_feasible(A, b, gamma.size, {}, method) is None:
            raise LpError("coefficient set {A xi = b, |xi| <= 1} is empty")
        return True
    res = max_abs_linear(gamma, con_A, con_b, method, node_limit, stop_at=sigma_min)
    if res.value >= sigma_min:
        return False
    return bool(sigma_min - res.upper_bound > 0.0)


def abs_ratio(xi, mu, gamma, sigma_min) -> float:
    a = np.abs(np.asarray(xi, dtype=float))
    den = sigma_min - float(np.dot(gamma, a))
    num = float(np.dot(mu, a))
    if den <= 0.0:
        return np.inf
    return num / den


def charnes_cooper_max_ratio(mu, gamma, sigma_min: float, con_A=None, con_b=None, method: str = "auto", node_limit: int = 4096) -> FractionalResult:
    """Maximize ``mu^T|xi| / (sigma_min - gamma^T|xi|)`` over the coefficient set.

    Every node solves the homogenized reciprocal program: with the split
    ``xi = xi+ - xi-`` and ``t = 1 / mu^T(xi+ + xi-)``, ``w = t [xi+; xi-]``,

        minimize    sigma_min t - [gamma; gamma]^T w
        subject to  [mu; mu]^T w = 1,
                    [gamma; gamma]^T w <= sigma_min t,
                    [A, -A] w = b t,
                    [I -I; -I I] w <= t,  [I I] w <= t,
                    w >= 0, t >= 0,

    and the ratio is the reciprocal of its optimum (``inf`` when the optimum
    vanishes).  Signs fixed by branching appear as zero upper bounds on the
    corresponding half of ``w``.

    Raises
    ------
    LpError
        The coefficient set is empty, or the denominator is not positive on
        it (call :func:`check_denominator_positive` first).
    """
    mu = np.asarray(mu, dtype=float).ravel()
    gamma = np.asarray(gamma, dtype=float).ravel()
    g = mu.size
    if gamma.size != g:
        raise ValueError("mu and gamma differ in length")
    if np.any(mu < 0) or np.any(gamma < 0) or sigma_min <= 0:
        raise ValueError("mu, gamma must be nonnegative and sigma_min positive")
    A, b = _coerce_constraints(con_A, con_b, g)
    if g == 0:
        return FractionalResult(np.zeros(0), 0.0, 0.0, True, True, 0)
    if not check_denominator_positive(gamma, sigma_min, A, b, method, node_limit):
        raise LpError("denominator sigma_min - gamma^T|xi| is not positive on the coefficient set")

    rows, rhs = _split_rows(g, with_t=True)
    ineq_A = np.vstack([rows, np.concatenate([gamma, gamma, [-sigma_min]])])
    ineq_b = np.concatenate([rhs, [0.0]])
    eq_rows = [np.concatenate([mu, mu, [0.0]])]
    eq_rhs = [1.0]
    if A.shape[0]:
        eq_rows.extend(np.hstack([A, -A, -b.reshape(-1, 1)]))
        eq_rhs.extend([0.0] * A.shape[0])
    eq_A = np.vstack(eq_rows)
    eq_b = np.asarray(eq_rhs)
    cost = np.concatenate([-gamma, -gamma, [sigma_min]])
    saw_zero_numerator = False

    def evaluate(signs):
        nonlocal saw_zero_numerator
        lp = LinearProgram(cost, eq_A=eq_A, eq_b=eq_b, ineq_A=ineq_A, ineq_b=ineq_b, var_lower=np.zeros(2 * g + 1), var_upper=_sign_bounds(g, signs, True))
        sol = solve_lp(lp, method)
        if sol.status is LpStatus.INFEASIBLE:
            # empty node, or numerator identically zero on it
            xi = _region_feasible(A, b, g, signs, method)
            if xi is None:
                return None
            saw_zero_numerator = True
            return 0.0, abs_ratio(xi, mu, gamma, sigma_min), xi, None
        if sol.status is not LpStatus.OPTIMAL:
            raise LpError(f"Charnes-Cooper LP ended with status {sol.status.value}")
        z = np.maximum(sol.x, 0.0)
        t = z[-1]
        recip = sol.objective_value
        upper = np.inf if recip <= 1e-12 else 1.0 / recip
        if t <= 1e-14:
            raise LpError("Charnes-Cooper scale variable vanished")
        w = z[:-1] / t
        xi = np.clip(w[:g] - w[g:], -1.0, 1.0)
        val = abs_ratio(xi, mu, gamma, sigma_min)
        gap = _complementarity_gap(w, g)
        free = [i for i in range(g) if i not in signs and (mu[i] != 0.0 or gamma[i] != 0.0)]
        j = max(free, key=lambda i: gap[i]) if free else None
        if j is not None and gap[j] <= 1e-9:
            j = None
        return upper, val, xi, j

    val, xi, upper, exact, nodes = _best_first(g, evaluate, node_limit)
    if xi is None:
        raise LpError("coefficient set {A xi = b, |xi| <= 1} is empty")
    zero = saw_zero_numerator and val == 0.0 and exact
    return FractionalResult(xi, float(val), float(upper), bool(exact), bool(zero), nodes)

