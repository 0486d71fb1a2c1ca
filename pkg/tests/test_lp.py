import itertools

import numpy as np
import pytest

from nmzreach.lp import (
    LinearProgram,
    LpError,
    LpStatus,
    abs_ratio,
    charnes_cooper_max_ratio,
    check_denominator_positive,
    enumerate_vertices,
    max_abs_linear,
    solve_lp,
    solve_lp_batch,
)

METHODS = ["simplex", "highs"]


@pytest.mark.parametrize("method", METHODS)
def test_box_minimum(method):
    sol = solve_lp(LinearProgram([1.0], var_lower=[0.0], var_upper=[1.0]), method)
    assert sol.optimal
    assert sol.x[0] == pytest.approx(0.0)


@pytest.mark.parametrize("method", METHODS)
def test_equality_constrained(method):
    p = LinearProgram([1.0, 1.0], eq_A=[[1.0, 1.0]], eq_b=[1.0], var_lower=[0, 0], var_upper=[1, 1])
    sol = solve_lp(p, method)
    assert sol.optimal
    assert sol.objective_value == pytest.approx(1.0)


@pytest.mark.parametrize("method", METHODS)
def test_infeasible_and_unbounded(method):
    p = LinearProgram([1.0], eq_A=[[1.0]], eq_b=[2.0], var_lower=[0.0], var_upper=[1.0])
    assert solve_lp(p, method).status is LpStatus.INFEASIBLE
    p = LinearProgram([1.0], sense="max", var_lower=[0.0])
    assert solve_lp(p, method).status is LpStatus.UNBOUNDED


def test_iteration_limit_status():
    rng = np.random.default_rng(0)
    p = LinearProgram(rng.standard_normal(6), ineq_A=rng.standard_normal((10, 6)), ineq_b=np.ones(10), var_lower=-np.ones(6), var_upper=np.ones(6))
    assert solve_lp(p, "simplex", max_iter=1).status is LpStatus.ITERATION_LIMIT


def test_bad_program_rejected():
    with pytest.raises(ValueError):
        LinearProgram([1.0, 2.0], eq_A=[[1.0, 1.0]], eq_b=[1.0, 2.0])
    with pytest.raises(ValueError):
        LinearProgram([1.0], sense="maximize")


def _random_bounded_lp(rng, d):
    A = rng.standard_normal((d + 3, d))
    b = rng.uniform(0.5, 2.0, d + 3)
    G = np.vstack([A, np.eye(d), -np.eye(d)])
    h = np.concatenate([b, 2 * np.ones(2 * d)])
    return G, h


@pytest.mark.parametrize("method", METHODS)
def test_random_lps_match_vertex_enumeration(method):
    rng = np.random.default_rng(1)
    for trial in range(25):
        d = rng.integers(1, 5)
        G, h = _random_bounded_lp(rng, d)
        c = rng.standard_normal(d)
        verts = enumerate_vertices(G, h)
        best = min(c @ v for v in verts)
        sol = solve_lp(LinearProgram(c, ineq_A=G, ineq_b=h), method)
        assert sol.optimal
        assert sol.objective_value == pytest.approx(best, abs=1e-8)
        assert LinearProgram(c, ineq_A=G, ineq_b=h).max_violation(sol.x) <= 1e-8 * (1 + np.linalg.norm(h))


def test_optimum_not_improvable_along_feasible_directions():
    rng = np.random.default_rng(2)
    for _ in range(10):
        G, h = _random_bounded_lp(rng, 3)
        c = rng.standard_normal(3)
        x = solve_lp(LinearProgram(c, ineq_A=G, ineq_b=h), "simplex").x
        for v in enumerate_vertices(G, h):
            # every segment towards another vertex stays feasible; objective must not drop
            y = x + 0.5 * (v - x)
            assert c @ y >= c @ x - 1e-9


def test_batch_matches_individual_solves():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((3, 8))
    xi = rng.uniform(-0.5, 0.5, 8)
    p = LinearProgram(np.zeros(8), eq_A=A, eq_b=A @ xi, var_lower=-np.ones(8), var_upper=np.ones(8))
    objs = [np.eye(8)[i] for i in range(8) for _ in range(2)]
    senses = ["min", "max"] * 8
    for method in ("simplex", "highs", "auto"):
        batch = solve_lp_batch(p, objs, senses, method)
        for c, s, sol in zip(objs, senses, batch):
            ref = solve_lp(LinearProgram(c, s, A, A @ xi, var_lower=-np.ones(8), var_upper=np.ones(8)), "highs")
            assert sol.optimal
            assert sol.objective_value == pytest.approx(ref.objective_value, abs=1e-8)


def test_enumerate_vertices_examples():
    box = np.vstack([np.eye(2), -np.eye(2)])
    assert len(enumerate_vertices(box, np.ones(4))) == 4
    seg = enumerate_vertices(box, np.ones(4), eq_A=[[1.0, -1.0]], eq_b=[0.0])
    assert sorted(tuple(np.round(v, 12)) for v in seg) == [(-1.0, -1.0), (1.0, 1.0)]
    with pytest.raises(ValueError):
        enumerate_vertices(np.eye(13), np.ones(13))


def test_enumerated_vertices_feasible():
    rng = np.random.default_rng(4)
    G, h = _random_bounded_lp(rng, 3)
    verts = enumerate_vertices(G, h)
    assert verts
    for v in verts:
        assert np.max(G @ v - h) <= 1e-8


# --------------------------------------------------------------------------
# Fractional programs over {A xi = b, |xi| <= 1}
# --------------------------------------------------------------------------


def _split_vertex_max(fun, A, b, g):
    """Maximum of a function of |xi| over the coefficient set: piecewise over
    sign orthants, each a polytope whose vertices are enumerated."""
    best = -np.inf
    for signs in itertools.product((1.0, -1.0), repeat=g):
        S = np.diag(signs)
        G = np.vstack([np.eye(g), -np.eye(g), -S])
        h = np.concatenate([np.ones(2 * g), np.zeros(g)])
        for v in enumerate_vertices(G, h, A, b, dim=g):
            best = max(best, fun(v))
    return best


def test_cc_single_coefficient():
    res = charnes_cooper_max_ratio([1.0], [0.5], 2.0)
    assert res.exact
    assert abs(res.xi_max[0]) == pytest.approx(1.0)
    assert res.ratio == pytest.approx(1 / 1.5)


def test_cc_pinned_to_zero():
    res = charnes_cooper_max_ratio([1.0], [0.5], 2.0, [[1.0]], [0.0])
    assert res.ratio == pytest.approx(0.0)
    assert res.zero_numerator


def test_cc_unconstrained_equals_vertex_formula():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = rng.integers(1, 6)
        mu, gamma = rng.uniform(0, 1, g), rng.uniform(0, 1, g)
        sig = gamma.sum() + rng.uniform(0.1, 2)
        res = charnes_cooper_max_ratio(mu, gamma, sig)
        assert res.ratio == pytest.approx(mu.sum() / (sig - gamma.sum()), abs=1e-9)


def test_cc_matches_enumeration_random():
    rng = np.random.default_rng(6)
    checked = 0
    while checked < 30:
        g = int(rng.integers(2, 5))
        r = int(rng.integers(1, 3))
        A = rng.standard_normal((r, g))
        b = A @ rng.uniform(-0.6, 0.6, g)
        mu, gamma = rng.uniform(0, 1, g), rng.uniform(0, 1, g)
        sig = gamma.sum() * rng.uniform(0.6, 1.5)
        if not check_denominator_positive(gamma, sig, A, b):
            with pytest.raises(LpError):
                charnes_cooper_max_ratio(mu, gamma, sig, A, b)
            continue
        ref = _split_vertex_max(lambda v: abs_ratio(v, mu, gamma, sig), A, b, g)
        res = charnes_cooper_max_ratio(mu, gamma, sig, A, b)
        assert res.exact
        assert res.ratio == pytest.approx(ref, abs=1e-7)
        assert abs_ratio(res.xi_max, mu, gamma, sig) == pytest.approx(ref, abs=1e-7)
        checked += 1


def test_denominator_check_examples():
    assert check_denominator_positive([0.0, 0.0], 1.0)
    assert not check_denominator_positive([1.0, 1.0], 1.0)
    assert check_denominator_positive([1.0, 1.0], 2.5)


def test_denominator_check_matches_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(20):
        g = int(rng.integers(2, 5))
        A = rng.standard_normal((1, g))
        b = A @ rng.uniform(-0.5, 0.5, g)
        gamma = rng.uniform(0, 1, g)
        peak = _split_vertex_max(lambda v: float(gamma @ np.abs(v)), A, b, g)
        sig = peak * rng.uniform(0.7, 1.3)
        assert check_denominator_positive(gamma, sig, A, b) == (sig - peak > 0)


def test_max_abs_linear_complementarity():
    rng = np.random.default_rng(8)
    for _ in range(20):
        g = 4
        A = rng.standard_normal((2, g))
        b = A @ rng.uniform(-0.5, 0.5, g)
        w = rng.uniform(0, 1, g)
        res = max_abs_linear(w, A, b)
        assert res.exact
        assert res.value == pytest.approx(_split_vertex_max(lambda v: float(w @ np.abs(v)), A, b, g), abs=1e-8)
        assert np.allclose(A @ res.xi_max, b, atol=1e-8)


def test_empty_coefficient_set_raises():
    with pytest.raises(LpError):
        max_abs_linear([1.0, 1.0], [[1.0, 1.0]], [3.0])
    with pytest.raises(LpError):
        check_denominator_positive([0.0, 0.0], 1.0, [[1.0, 1.0]], [3.0])


def test_cc_badly_scaled_weights():
    # tiny numerator weights stretch the homogenized program by orders of magnitude
    rng = np.random.default_rng(9)
    checked = 0
    while checked < 10:
        g = int(rng.integers(3, 5))
        A = rng.standard_normal((2, g))
        b = A @ rng.uniform(-0.5, 0.5, g)
        mu, gamma = 1e-3 * rng.uniform(0, 1, g), 1e-3 * rng.uniform(0, 1, g)
        sig = 0.5
        ref = _split_vertex_max(lambda v: abs_ratio(v, mu, gamma, sig), A, b, g)
        res = charnes_cooper_max_ratio(mu, gamma, sig, A, b)
        assert res.ratio == pytest.approx(ref, rel=1e-7, abs=1e-12)
        checked += 1


def test_max_abs_linear_stops_at_threshold():
    rng = np.random.default_rng(10)
    A = rng.standard_normal((3, 10))
    b = A @ rng.uniform(-0.5, 0.5, 10)
    w = rng.uniform(0, 1, 10)
    full = max_abs_linear(w, A, b)
    early = max_abs_linear(w, A, b, stop_at=0.5 * full.value)
    assert early.value >= 0.5 * full.value and early.nodes <= full.nodes
    assert not check_denominator_positive(w, 0.5 * full.value, A, b)
    assert check_denominator_positive(w, w.sum() + 0.1, A, b)
