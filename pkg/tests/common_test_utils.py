"""Shared test helpers."""

import numpy as np

from mera_kit.tensor_core import DensityMatrix, max_abs


def random_matrix(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))


def random_state_matrix(dim: int, seed: int) -> np.ndarray:
    """Random full-rank density matrix as a plain array."""
    g = random_matrix(dim, seed)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def assert_matrices_close(a: np.ndarray | DensityMatrix, b: np.ndarray | DensityMatrix, tol: float) -> None:
    a = a.matrix if isinstance(a, DensityMatrix) else a
    b = b.matrix if isinstance(b, DensityMatrix) else b
    assert a.shape == b.shape
    deviation = max_abs(a - b)
    assert deviation <= tol, f"max deviation {deviation:.3e} exceeds {tol:.0e}"
