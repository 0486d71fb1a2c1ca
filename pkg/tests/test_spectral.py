import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nmzreach.spectral import (
    SpectralError,
    nullspace_basis,
    orth_complement,
    pseudoinverse,
    rank_of,
    sigma_min,
    sin_theta,
    svd_full,
    weyl_check,
)

# entries are either exactly zero or of moderate magnitude
finite = st.one_of(st.just(0.0), st.floats(1e-6, 10), st.floats(-10, -1e-6))


def test_svd_identity_and_diagonal():
    assert np.allclose(svd_full(np.eye(3)).S, [1, 1, 1])
    assert np.allclose(svd_full(np.diag([3.0, 1.0])).S, [3, 1])


def test_svd_reconstruction_random():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((5, 3))
    f = svd_full(M)
    Sigma = np.zeros((5, 3))
    Sigma[:3, :3] = np.diag(f.S)
    assert np.linalg.norm(f.U @ Sigma @ f.V.T - M) <= 1e-9 * (1 + np.linalg.norm(M))
    assert np.allclose(f.U.T @ f.U, np.eye(5), atol=1e-10)
    assert np.allclose(f.V.T @ f.V, np.eye(3), atol=1e-10)
    assert np.all(np.diff(f.S) <= 0)


def test_svd_rejects_nonfinite():
    with pytest.raises(SpectralError):
        svd_full(np.array([[np.nan, 1.0]]))


def test_rank_basic_cases():
    assert rank_of(np.zeros((3, 4))) == 0
    assert rank_of(np.eye(4)) == 4
    rng = np.random.default_rng(1)
    assert rank_of(np.outer(rng.standard_normal(5), rng.standard_normal(7))) == 1


def test_pseudoinverse_examples():
    assert np.allclose(pseudoinverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))
    Q, _ = np.linalg.qr(np.random.default_rng(2).standard_normal((4, 4)))
    assert np.allclose(pseudoinverse(Q), Q.T)
    M = np.random.default_rng(3).standard_normal((3, 7))
    assert np.allclose(M @ pseudoinverse(M), np.eye(3), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(arrays(float, (4, 6), elements=finite), st.integers(1, 4))
def test_penrose_identities(M, r):
    # force a rank-deficient matrix half the time
    if r < 4:
        U, S, Vt = np.linalg.svd(M, full_matrices=False)
        S[r:] = 0
        M = (U * S) @ Vt
    P = pseudoinverse(M)
    scale = 1 + np.linalg.norm(M) * np.linalg.norm(P)
    assert np.allclose(M @ P @ M, M, atol=1e-8 * scale)
    assert np.allclose(P @ M @ P, P, atol=1e-8 * scale)
    assert np.allclose((M @ P).T, M @ P, atol=1e-8 * scale)
    assert np.allclose((P @ M).T, P @ M, atol=1e-8 * scale)


def test_pseudoinverse_involution():
    rng = np.random.default_rng(4)
    for _ in range(20):
        M = rng.standard_normal((3, 5))
        assert np.allclose(pseudoinverse(pseudoinverse(M)), M, atol=1e-8)


def test_nullspace_examples():
    B = nullspace_basis(np.array([[1.0, 1.0]]))
    assert B.shape == (2, 1)
    assert np.allclose(np.abs(B[:, 0]), [2**-0.5, 2**-0.5])
    assert B[0, 0] == pytest.approx(-B[1, 0])
    assert nullspace_basis(np.eye(3)).shape == (3, 0)


@settings(max_examples=40, deadline=None)
@given(arrays(float, (5, 8), elements=finite), st.integers(0, 5))
def test_rank_nullity(M, r):
    U, S, Vt = np.linalg.svd(M, full_matrices=False)
    S[r:] = 0
    M = (U * S) @ Vt
    B = nullspace_basis(M)
    assert B.shape[1] + rank_of(M) == M.shape[1]
    if np.any(M):
        assert np.max(np.abs(M @ B), initial=0) <= 1e-9 * max(1.0, np.linalg.norm(M, 2))
    assert np.allclose(B.T @ B, np.eye(B.shape[1]), atol=1e-10)


def test_orth_complement():
    X = np.array([[1.0], [0.0]])
    P = orth_complement(X)
    assert np.allclose(np.abs(P[:, 0]), [0, 1])
    assert orth_complement(np.eye(3)).shape == (3, 0)
    Q, _ = np.linalg.qr(np.random.default_rng(5).standard_normal((5, 2)))
    P = orth_complement(Q)
    assert np.linalg.norm(Q.T @ P, 2) <= 1e-10
    with pytest.raises(SpectralError):
        orth_complement(np.array([[2.0], [0.0]]))


def test_sin_theta_examples():
    e1, e2 = np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]])
    assert sin_theta(e1, e1) == 0.0
    assert sin_theta(e1, e2) == pytest.approx(1.0)
    d = np.array([[1.0], [1.0]]) / np.sqrt(2)
    assert sin_theta(e1, d) == pytest.approx(np.sin(np.pi / 4), abs=1e-12)
    with pytest.raises(SpectralError):
        sin_theta(np.eye(3)[:, :1], np.eye(3)[:, :2])


def test_sin_theta_symmetric_and_basis_invariant():
    rng = np.random.default_rng(6)
    for _ in range(30):
        U1, _ = np.linalg.qr(rng.standard_normal((6, 2)))
        U2, _ = np.linalg.qr(rng.standard_normal((6, 2)))
        Q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
        s = sin_theta(U1, U2)
        assert 0.0 <= s <= 1.0
        assert s == pytest.approx(sin_theta(U2, U1), abs=1e-10)
        assert s == pytest.approx(sin_theta(U1 @ Q, U2), abs=1e-10)


def test_weyl_examples():
    M = np.diag([3.0, 1.0])
    assert weyl_check(M, np.zeros((2, 2))).max_deviation == 0.0
    rep = weyl_check(M, np.diag([0.5, -0.2]))
    assert rep.max_deviation == pytest.approx(0.5)
    assert rep.bound == pytest.approx(0.5)
    assert rep.holds


def test_weyl_random_pairs():
    rng = np.random.default_rng(7)
    assert all(weyl_check(rng.standard_normal((4, 6)), rng.standard_normal((4, 6))).holds for _ in range(200))


def test_sigma_min():
    assert sigma_min(np.diag([3.0, 0.5])) == pytest.approx(0.5)
    assert sigma_min(np.zeros((0, 3))) == 0.0
