"""Shared fixtures-as-functions for the test suite."""

import numpy as np

from nmzreach.cli import load_config
from nmzreach.identify import (
    NoiseModel,
    build_cmz_model_set,
    build_data_matrices,
    build_mz_model_set,
    simulate_trajectories,
)
from nmzreach.setrep import Zonotope


def five_dim_config():
    return load_config()


def five_dim_system():
    cfg = five_dim_config()
    return cfg.A, cfg.B, cfg.initial_set, cfg.input_set, cfg.noise_set


def five_dim_data(seed=0, K=10, steps=3, noise=None):
    A, B, X0, U, W = five_dim_system()
    W = W if noise is None else noise
    rng = np.random.default_rng(seed)
    trajs, noises = simulate_trajectories(A, B, X0, U, W, K, steps, rng)
    return build_data_matrices(trajs, noises), NoiseModel(W)


def stable_system(rng, n, m):
    A = rng.standard_normal((n, n))
    A *= 0.8 / max(1e-9, np.max(np.abs(np.linalg.eigvals(A))))
    return A, rng.standard_normal((n, m))


def random_experiment(seed, n=2, m=1, noise_scale=0.01, K=2, steps=3, gens=None):
    """Small identification problem with low noise so bounds are informative."""
    rng = np.random.default_rng(seed)
    A, B = stable_system(rng, n, m)
    X0 = Zonotope(rng.standard_normal(n), np.eye(n))
    U = Zonotope(np.zeros(m), np.eye(m))
    gw = n if gens is None else gens
    W = Zonotope(np.zeros(n), noise_scale * rng.uniform(0.5, 1.5, size=(n, gw)))
    trajs, noises = simulate_trajectories(A, B, X0, U, W, K, steps, rng)
    data = build_data_matrices(trajs, noises)
    noise = NoiseModel(W)
    return {
        "A": A,
        "B": B,
        "data": data,
        "noise": noise,
        "M": build_mz_model_set(data, noise),
        "N": build_cmz_model_set(data, noise),
        "noises": noises,
    }
