"""Model-set identification from noisy input-state trajectories.

Data matrices are ordered trajectory-major, time-minor::

    X+ = [x1(1) .. x1(T1)  x2(1) .. x2(T2)  ...]
    X- = [x1(0) .. x1(T1-1) ...]
    U- = [u1(0) .. u1(T1-1) ...]

The noise matrix zonotope over the T data columns has one generator per
(noise generator i, column j) pair, stored at index ``i * T + j`` with
``g_i`` placed in column ``j``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .setrep import (
    ConstrainedMatrixZonotope,
    MatrixZonotope,
    Zonotope,
    sample_zonotope,
)
from .spectral import DEFAULT_REL_TOL, nullspace_basis, pseudoinverse, rank_of


class IdentificationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TrajectoryData:
    """Stacked data matrices; ``noise`` holds the injected w(k) when known."""

    x_plus: np.ndarray
    x_minus: np.ndarray
    u_minus: np.ndarray
    lengths: tuple = field(default=())
    noise: np.ndarray | None = None

    def __post_init__(self):
        xp = np.atleast_2d(np.asarray(self.x_plus, dtype=float))
        xm = np.atleast_2d(np.asarray(self.x_minus, dtype=float))
        um = np.atleast_2d(np.asarray(self.u_minus, dtype=float))
        T = xp.shape[1]
        if xm.shape != xp.shape or um.shape[1] != T:
            raise IdentificationError(f"inconsistent data shapes {xp.shape}, {xm.shape}, {um.shape}")
        lengths = tuple(int(t) for t in self.lengths) or (T,)
        if sum(lengths) != T:
            raise IdentificationError(f"trajectory lengths sum to {sum(lengths)}, data has {T} columns")
        object.__setattr__(self, "x_plus", xp)
        object.__setattr__(self, "x_minus", xm)
        object.__setattr__(self, "u_minus", um)
        object.__setattr__(self, "lengths", lengths)
        if self.noise is not None:
            w = np.atleast_2d(np.asarray(self.noise, dtype=float))
            if w.shape != xp.shape:
                raise IdentificationError("recorded noise must match X+ in shape")
            object.__setattr__(self, "noise", w)

    @property
    def n(self) -> int:
        return self.x_plus.shape[0]

    @property
    def m(self) -> int:
        return self.u_minus.shape[0]

    @property
    def T(self) -> int:
        return self.x_plus.shape[1]

    @property
    def K(self) -> int:
        return len(self.lengths)

    @property
    def D(self) -> np.ndarray:
        return np.vstack([self.x_minus, self.u_minus])

    def scaled(self, d: float) -> "TrajectoryData":
        """Data with states and inputs multiplied by ``d``.

        With recorded noise the rescaled trajectories are kept consistent with
        the same noise sequence: ``X+' = d (X+ - W) + W``.  Without it every
        matrix is simply multiplied by ``d``.
        """
        if self.noise is None:
            return TrajectoryData(d * self.x_plus, d * self.x_minus, d * self.u_minus, self.lengths)
        xp = d * (self.x_plus - self.noise) + self.noise
        return TrajectoryData(xp, d * self.x_minus, d * self.u_minus, self.lengths, self.noise)


@dataclass(frozen=True, eq=False)
class NoiseModel:
    zonotope: Zonotope

    @property
    def dim(self) -> int:
        return self.zonotope.dim

    @property
    def num_generators(self) -> int:
        return self.zonotope.num_generators


def build_data_matrices(trajectories, noises=None) -> TrajectoryData:
    """Stack trajectories ``(states, inputs)`` into X+, X-, U-.

    ``states`` has shape (T_i + 1, n) and ``inputs`` (T_i, m), one row per
    time step.  ``noises`` optionally gives the (T_i, n) noise sequences.
    """
    if not trajectories:
        raise IdentificationError("no trajectories given")
    xp, xm, um, ws, lengths = [], [], [], [], []
    for k, (states, inputs) in enumerate(trajectories):
        X = np.atleast_2d(np.asarray(states, dtype=float))
        U = np.asarray(inputs, dtype=float)
        if U.ndim == 1:
            U = U.reshape(-1, 1)
        Ti = U.shape[0]
        if Ti < 1 or X.shape[0] != Ti + 1:
            raise IdentificationError(f"trajectory {k}: {X.shape[0]} states for {Ti} inputs")
        xm.append(X[:-1].T)
        xp.append(X[1:].T)
        um.append(U.T)
        lengths.append(Ti)
        if noises is not None:
            W = np.atleast_2d(np.asarray(noises[k], dtype=float))
            if W.shape != (Ti, X.shape[1]):
                raise IdentificationError(f"trajectory {k}: noise shape {W.shape}")
            ws.append(W.T)
    noise = np.hstack(ws) if noises is not None else None
    return TrajectoryData(np.hstack(xp), np.hstack(xm), np.hstack(um), tuple(lengths), noise)


def build_noise_matrix_zonotope(noise: NoiseModel, T: int) -> MatrixZonotope:
    if T < 1:
        raise IdentificationError("T must be >= 1")
    c, G = noise.zonotope.center, noise.zonotope.generators
    n, gw = G.shape
    gens = np.zeros((gw * T, n, T))
    for i in range(gw):
        for j in range(T):
            gens[i * T + j, :, j] = G[:, i]
    return MatrixZonotope(np.tile(c[:, None], (1, T)), gens)


def data_nullspace(data: TrajectoryData, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Orthonormal ``D_perp`` (T x (T - rank D)) with ``D @ D_perp = 0``."""
    return nullspace_basis(data.D, rel_tol)


def _noise_constraints(noise: NoiseModel, data: TrajectoryData, rel_tol: float):
    Dp = data_nullspace(data, rel_tol)
    c, G = noise.zonotope.center, noise.zonotope.generators
    n, gw = G.shape
    T, nu = Dp.shape
    # column (i*T + j) is vec(g_i Dp[j, :]) = kron(Dp[j, :], g_i) in column-major order
    A = np.einsum("jk,ai->kaij", Dp, G).reshape(nu * n, gw * T)
    resid = (data.x_plus - c[:, None]) @ Dp
    b = resid.reshape(-1, order="F")
    return A, b


def build_noise_cmz(noise: NoiseModel, data: TrajectoryData, rel_tol: float = DEFAULT_REL_TOL, validate: bool = True) -> ConstrainedMatrixZonotope:
    """Noise matrix zonotope constrained to agree with the data.

    The constraint is ``(X+ - C_w) D_perp = sum_i xi_i G_i D_perp`` written
    column-major; it is vacuous (zero rows) when D has full column rank.
    """
    if noise.dim != data.n:
        raise IdentificationError(f"noise dimension {noise.dim} differs from state dimension {data.n}")
    Mw = build_noise_matrix_zonotope(noise, data.T)
    A, b = _noise_constraints(noise, data, rel_tol)
    return ConstrainedMatrixZonotope(Mw.center, Mw.generators, A, b, validate=validate)


def _model_matrices(data: TrajectoryData, noise: NoiseModel, rel_tol: float):
    if noise.dim != data.n:
        raise IdentificationError(f"noise dimension {noise.dim} differs from state dimension {data.n}")
    D = data.D
    if rank_of(D, rel_tol) < D.shape[0]:
        warnings.warn("data matrix [X-; U-] is not full row rank; model set relies on the pseudoinverse", RuntimeWarning, stacklevel=3)
    H = pseudoinverse(D, rel_tol)
    c, G = noise.zonotope.center, noise.zonotope.generators
    T = data.T
    center = (data.x_plus - c[:, None]) @ H
    # -G_k H with G_k = g_i e_j^T is the outer product -g_i H[j, :]
    gens = -np.einsum("ai,jb->ijab", G, H).reshape(G.shape[1] * T, data.n, H.shape[1])
    return center, gens, H


def data_pseudoinverse(data: TrajectoryData, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    return pseudoinverse(data.D, rel_tol)


def build_mz_model_set(data: TrajectoryData, noise: NoiseModel, rel_tol: float = DEFAULT_REL_TOL) -> MatrixZonotope:
    """``M = (X+ - M_w) H`` with ``H = [X-; U-]^+``: center and generators."""
    center, gens, _ = _model_matrices(data, noise, rel_tol)
    return MatrixZonotope(center, gens)


def build_cmz_model_set(data: TrajectoryData, noise: NoiseModel, rel_tol: float = DEFAULT_REL_TOL) -> ConstrainedMatrixZonotope:
    """The MZ model set carrying the noise constraints.

    Raises :class:`~nmzreach.setrep.SetError` when the coefficient set is
    empty, i.e. the data is inconsistent with the noise bound.
    """
    center, gens, _ = _model_matrices(data, noise, rel_tol)
    A, b = _noise_constraints(noise, data, rel_tol)
    return ConstrainedMatrixZonotope(center, gens, A, b)


def noise_factor_generators(noise: NoiseModel, T: int) -> np.ndarray:
    """Left factors ``-G_w^(k)`` such that each model generator is ``-G_w^(k) H``."""
    return -build_noise_matrix_zonotope(noise, T).generators


def true_noise_coefficients(noise: NoiseModel, W) -> np.ndarray:
    """Coefficients ``xi`` with ``W = C_w + sum_k xi_k G_w^(k)``.

    Requires each column ``w_j - c`` to lie in the range of the noise
    generators; the least-squares solution is returned per column.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    c, G = noise.zonotope.center, noise.zonotope.generators
    coeffs = np.linalg.lstsq(G, W - c[:, None], rcond=None)[0]  # (gw, T)
    return coeffs.reshape(-1)


def simulate_lti(A, B, x0, inputs, noise_samples=None) -> np.ndarray:
    """States of ``x(k+1) = A x(k) + B u(k) + w(k)``, one row per step."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float).reshape(A.shape[0], -1)
    U = np.asarray(inputs, dtype=float).reshape(-1, B.shape[1])
    x = np.asarray(x0, dtype=float).ravel()
    if x.size != A.shape[0] or A.shape[0] != A.shape[1]:
        raise IdentificationError("state dimension mismatch")
    steps = U.shape[0]
    W = np.zeros((steps, x.size)) if noise_samples is None else np.asarray(noise_samples, dtype=float).reshape(steps, x.size)
    out = np.empty((steps + 1, x.size))
    out[0] = x
    for k in range(steps):
        out[k + 1] = A @ out[k] + B @ U[k] + W[k]
    return out


def simulate_trajectories(A, B, X0: Zonotope, U: Zonotope, W: Zonotope, K: int, steps: int, rng: np.random.Generator):
    """Draw K trajectories with x(0), u(k), w(k) uniform in their boxes.

    Returns ``(trajectories, noises)`` ready for :func:`build_data_matrices`.
    """
    trajs, noises = [], []
    for _ in range(K):
        x0 = sample_zonotope(X0, 1, rng)[0]
        u = sample_zonotope(U, steps, rng)
        w = sample_zonotope(W, steps, rng)
        trajs.append((simulate_lti(A, B, x0, u, w), u))
        noises.append(w)
    return trajs, noises
