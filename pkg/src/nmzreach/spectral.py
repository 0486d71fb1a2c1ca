"""Dense spectral linear algebra used throughout the package.

Everything here is built on a full SVD.  The rank cutoff is
``rel_tol * max(m, n) * sigma_1`` and is shared by :func:`rank_of`,
:func:`pseudoinverse` and :func:`nullspace_basis` so that rank and nullity
always add up to the column count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

DEFAULT_REL_TOL = 1e-10


class SpectralError(RuntimeError):
    """Raised when a factorization fails to converge or an input is invalid."""


@dataclass(frozen=True)
class SvdFactors:
    """Full singular value decomposition ``M = U diag(S) V^T``.

    ``U`` is m x m, ``V`` is n x n (note: ``V``, not ``V^T``) and ``S`` holds
    the min(m, n) singular values in descending order.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    def left(self, r: int) -> np.ndarray:
        return self.U[:, :r]

    def left_perp(self, r: int) -> np.ndarray:
        return self.U[:, r:]

    def right(self, r: int) -> np.ndarray:
        return self.V[:, :r]

    def right_perp(self, r: int) -> np.ndarray:
        return self.V[:, r:]


@dataclass(frozen=True)
class WeylReport:
    max_deviation: float
    bound: float
    holds: bool


def _as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    if M.ndim != 2:
        raise SpectralError(f"expected a 2-D array, got shape {M.shape}")
    return M


def svd_full(M) -> SvdFactors:
    """Full SVD with square orthogonal factors (LAPACK gesdd, gesvd fallback)."""
    M = _as_matrix(M)
    if not np.all(np.isfinite(M)):
        raise SpectralError("matrix has non-finite entries")
    m, n = M.shape
    if m == 0 or n == 0:
        return SvdFactors(np.eye(m), np.zeros(0), np.eye(n))
    try:
        U, S, Vt = np.linalg.svd(M, full_matrices=True)
    except np.linalg.LinAlgError:
        try:
            U, S, Vt = scipy.linalg.svd(M, full_matrices=True, lapack_driver="gesvd")
        except (np.linalg.LinAlgError, ValueError) as err:
            raise SpectralError("SVD did not converge") from err
    return SvdFactors(U, S, Vt.T)


def _cutoff(shape, S: np.ndarray, rel_tol: float) -> float:
    if S.size == 0:
        return np.inf
    return rel_tol * max(shape) * S[0]


def rank_of(M, rel_tol: float = DEFAULT_REL_TOL) -> int:
    M = _as_matrix(M)
    if M.size == 0:
        return 0
    S = np.linalg.svd(M, compute_uv=False)
    if S[0] == 0.0:
        return 0
    return int(np.sum(S > _cutoff(M.shape, S, rel_tol)))


def pseudoinverse(M, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Moore-Penrose inverse with the package-wide rank truncation."""
    M = _as_matrix(M)
    m, n = M.shape
    if M.size == 0:
        return np.zeros((n, m))
    U, S, Vt = np.linalg.svd(M, full_matrices=False)
    keep = S > _cutoff(M.shape, S, rel_tol) if S[0] > 0 else np.zeros_like(S, dtype=bool)
    S_inv = np.zeros_like(S)
    S_inv[keep] = 1.0 / S[keep]
    return (Vt.T * S_inv) @ U.T


def nullspace_basis(M, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the right nullspace ``{v : M v = 0}``."""
    M = _as_matrix(M)
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n)
    r = rank_of(M, rel_tol)
    f = svd_full(M)
    return f.V[:, r:].copy()


def orth_complement(X, tol: float = 1e-8) -> np.ndarray:
    """Columns completing an orthonormal ``X`` (n x p) to an orthogonal matrix."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    n, p = X.shape
    if p == 0:
        return np.eye(n)
    if np.max(np.abs(X.T @ X - np.eye(p))) > tol:
        raise SpectralError("orth_complement expects orthonormal columns")
    U = np.linalg.svd(X, full_matrices=True)[0]
    return U[:, p:].copy()


def sin_theta(U1, U2) -> float:
    """Spectral norm of sin(Theta) between the column spaces of U1 and U2.

    Both inputs must have orthonormal columns and identical shapes.  The value
    is ``sigma_max(U2_perp^T U1)``.
    """
    U1 = np.asarray(U1, dtype=float)
    U2 = np.asarray(U2, dtype=float)
    if U1.ndim == 1:
        U1 = U1.reshape(-1, 1)
    if U2.ndim == 1:
        U2 = U2.reshape(-1, 1)
    if U1.shape != U2.shape:
        raise SpectralError(f"subspace bases differ in shape: {U1.shape} vs {U2.shape}")
    n, p = U1.shape
    if p == 0 or p == n:
        return 0.0
    P2 = orth_complement(U2)
    val = np.linalg.norm(P2.T @ U1, 2)
    return float(min(1.0, max(0.0, val)))


def spectral_norm(M) -> float:
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    if M.ndim == 1:
        return float(np.linalg.norm(M))
    return float(np.linalg.norm(M, 2))


def sigma_min(M) -> float:
    """Smallest of the min(m, n) singular values (0 for empty input)."""
    M = _as_matrix(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def weyl_check(M, E, atol: float = 1e-10) -> WeylReport:
    M = _as_matrix(M)
    E = _as_matrix(E)
    if M.shape != E.shape:
        raise SpectralError(f"shape mismatch {M.shape} vs {E.shape}")
    s0 = np.linalg.svd(M, compute_uv=False)
    s1 = np.linalg.svd(M + E, compute_uv=False)
    dev = float(np.max(np.abs(s1 - s0))) if s0.size else 0.0
    bound = spectral_norm(E)
    return WeylReport(dev, bound, dev <= bound + atol)
