"""Named one-site operators and nearest-neighbour bond matrices."""

import numpy as np

from .errors import ArgumentError

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def _clock(dim: int) -> np.ndarray:
    return np.diag(np.exp(2j * np.pi * np.arange(dim) / dim))


def _shift(dim: int) -> np.ndarray:
    return np.roll(np.eye(dim, dtype=np.complex128), 1, axis=0)


def _projector_zero(dim: int) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=np.complex128)
    p[0, 0] = 1.0
    return p


_QUBIT_ONLY = {"pauli-x": PAULI_X, "pauli-y": PAULI_Y, "pauli-z": PAULI_Z}
_ANY_DIM = {
    "identity": lambda d: np.eye(d, dtype=np.complex128),
    "clock": _clock,
    "shift": _shift,
    "shift-x": lambda d: 0.5 * (_shift(d) + _shift(d).conj().T),
    "projector-0": _projector_zero,
}

OPERATOR_NAMES = sorted([*_QUBIT_ONLY, *_ANY_DIM])


def named_operator(name: str, dim: int = 2) -> np.ndarray:
    """One-site operator by name.

    Args:
        name: one of OPERATOR_NAMES
        dim: local dimension; Pauli matrices need dim == 2

    Returns:
        A fresh ``dim × dim`` complex matrix
    """
    key = name.strip().lower()
    if key in _QUBIT_ONLY:
        if dim != 2:
            raise ArgumentError(f"{name} is defined for dim 2 only, got {dim}")
        return _QUBIT_ONLY[key].copy()
    if key in _ANY_DIM:
        if dim < 1:
            raise ArgumentError(f"dimension must be positive, got {dim}")
        return _ANY_DIM[key](dim)
    raise ArgumentError(f"unknown operator {name!r}; choose one of {OPERATOR_NAMES}")


def random_hermitian(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (g + g.conj().T)


def traceless(op: np.ndarray) -> np.ndarray:
    """O − tr(O)/d · 1."""
    op = np.asarray(op, dtype=np.complex128)
    d = op.shape[0]
    return op - np.trace(op) / d * np.eye(d)


def heisenberg_bond(dim: int = 2) -> np.ndarray:
    """XX + YY + ZZ on two qubits."""
    if dim != 2:
        raise ArgumentError(f"the Heisenberg bond is defined for qubits, got dim {dim}")
    return np.kron(PAULI_X, PAULI_X) + np.kron(PAULI_Y, PAULI_Y) + np.kron(PAULI_Z, PAULI_Z)


def ising_bond(field: float = 1.0, dim: int = 2) -> np.ndarray:
    """−ZZ − g/2 (X⊗1 + 1⊗X): the transverse field split evenly between the two bonds of a site."""
    if dim != 2:
        raise ArgumentError(f"the Ising bond is defined for qubits, got dim {dim}")
    eye = np.eye(2)
    return -np.kron(PAULI_Z, PAULI_Z) - 0.5 * field * (np.kron(PAULI_X, eye) + np.kron(eye, PAULI_X))


def random_bond(dim: int, seed: int) -> np.ndarray:
    return random_hermitian(dim * dim, seed)


def bond_matrix(model: str, dim: int = 2, field: float = 1.0, seed: int = 0) -> np.ndarray:
    match model:
        case "heisenberg":
            return heisenberg_bond(dim)
        case "ising":
            return ising_bond(field, dim)
        case "random":
            return random_bond(dim, seed)
    raise ArgumentError(f"unknown model {model!r}; choose heisenberg, ising or random")


def nearest_neighbor_terms(n_sites: int, bond: np.ndarray):
    """Periodic chain Σ_s h_{s,s+1} as level-0 HamiltonianTerms."""
    from .renorm import HamiltonianTerms, LocalOperator

    bond = np.asarray(bond, dtype=np.complex128)
    return HamiltonianTerms(
        0, tuple(LocalOperator(0, (s, (s + 1) % n_sites), bond) for s in range(n_sites))
    )


def heisenberg_terms(n_sites: int):
    return nearest_neighbor_terms(n_sites, heisenberg_bond())


def ising_terms(n_sites: int, field: float = 1.0):
    return nearest_neighbor_terms(n_sites, ising_bond(field))


def random_terms(n_sites: int, dim: int, seed: int):
    """Independent random Hermitian bond on every link."""
    from .renorm import HamiltonianTerms, LocalOperator

    seeds = np.random.SeedSequence(seed).generate_state(n_sites, dtype=np.uint64)
    return HamiltonianTerms(
        0,
        tuple(
            LocalOperator(0, (s, (s + 1) % n_sites), random_bond(dim, int(seeds[s])))
            for s in range(n_sites)
        ),
    )
