"""Brute-force state vectors for small networks.

The network is read as a circuit from the top down: the top tensor prepares two wires, every
layer applies its isometries then its disentanglers. Site 0 is the slowest-varying index of the
amplitude vector.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import reduce
from typing import Any

import numpy as np

from .config import DEFAULT_MAX_AMPLITUDES
from .errors import ArgumentError, CapabilityError, CostGuardError, LoadError, ShapeError, ValidationError
from .logger import get_logger
from .mera import Mera, MeraLayer
from .tensor_core import DensityMatrix, entropy_of_spectrum, max_abs

NORM_TOL = 1e-10
MAX_RDM_SIDE = 1024
MAX_LAYER_WIRES = 12


@dataclass(frozen=True, eq=False)
class StateVector:
    n_sites: int
    site_dim: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amplitudes.size != self.site_dim**self.n_sites:
            raise ShapeError(
                f"{amplitudes.size} amplitudes for {self.n_sites} sites of dim {self.site_dim}"
            )
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm is {norm:.12g}, expected 1")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.site_dim,) * self.n_sites)


def input_dims(m: Mera) -> list[int]:
    """Dimension of each incoming wire, ordered as ``mera.input_slots``."""
    dims = [layer.chi_in**2 // layer.chi_out for layer in m.layers for _ in range(layer.n_wires_out)]
    return dims + [m.top.chi, m.top.chi]


def default_inputs(m: Mera) -> list[np.ndarray]:
    """|0⟩ on every incoming wire; reproduces the network's own state."""
    vectors = []
    for dim in input_dims(m):
        v = np.zeros(dim, dtype=np.complex128)
        v[0] = 1.0
        vectors.append(v)
    return vectors


def random_inputs(m: Mera, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    vectors = []
    for dim in input_dims(m):
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        vectors.append(v / np.linalg.norm(v))
    return vectors


def _check_inputs(m: Mera, inputs: Sequence[np.ndarray]) -> list[np.ndarray]:
    if not m.has_parents:
        raise CapabilityError("custom inputs need parent unitaries; build with keep_parents=True")
    dims = input_dims(m)
    if len(inputs) != len(dims):
        raise ArgumentError(f"expected {len(dims)} input vectors, got {len(inputs)}")
    vectors = []
    for index, (phi, dim) in enumerate(zip(inputs, dims, strict=True)):
        phi = np.asarray(phi, dtype=np.complex128).reshape(-1)
        if phi.size != dim:
            raise ShapeError(f"input {index} has dim {phi.size}, expected {dim}")
        if abs(np.linalg.norm(phi) - 1.0) > NORM_TOL:
            raise ValidationError(f"input {index} is not normalized")
        vectors.append(phi)
    return vectors


def _guard(count: int, limit: int, what: str) -> None:
    if count > limit:
        raise CostGuardError(f"{what} of {count} exceeds the guard of {limit}; raise MERA_KIT_MAX_AMPLITUDES")


def apply_layer(psi: np.ndarray, layer: MeraLayer, isometries: Sequence[np.ndarray]) -> np.ndarray:
    """Map a coarse state of ``layer.n_wires_out`` wires to the fine state of ``n_wires_in`` wires."""
    n, half = layer.n_wires_in, layer.n_wires_out
    f, c = layer.chi_in, layer.chi_out
    psi = psi.reshape(-1)
    for k in range(half):
        left, right = f ** (2 * k), c ** (half - k - 1)
        psi = np.einsum("aib,xyi->axyb", psi.reshape(left, c, right), isometries[k]).reshape(-1)
    for j in range(half - 1):
        left, right = f ** (2 * j + 1), f ** (n - 2 * j - 3)
        psi = np.einsum("aijb,xyij->axyb", psi.reshape(left, f, f, right), layer.disentangler(j).array)
        psi = psi.reshape(-1)
    # the last disentangler wraps around: in1 on wire n-1, in2 on wire 0
    wrap = layer.disentangler(half - 1).array
    return np.einsum("bma,xyab->ymx", psi.reshape(f, f ** (n - 2), f), wrap).reshape(-1)


def full_state(
    m: Mera,
    inputs: Sequence[np.ndarray] | None = None,
    *,
    level: int = 0,
    max_amplitudes: int = DEFAULT_MAX_AMPLITUDES,
) -> StateVector:
    """State |Ψ_τ⟩ on the level-τ lattice (τ = 0 gives the physical state).

    Args:
        inputs: one vector per incoming wire (see ``mera.input_slots``); needs parent unitaries
        max_amplitudes: amplitude guard
    """
    n_wires, dim = m.wire_count(level), m.wire_dim(level)
    _guard(dim**n_wires, max_amplitudes, "state vector size")

    offsets = np.cumsum([0] + [layer.n_wires_out for layer in m.layers])
    if inputs is None:
        psi = m.top.array.reshape(-1)
        vectors = None
    else:
        vectors = _check_inputs(m, inputs)
        psi = m.top.with_inputs(vectors[-2], vectors[-1]).reshape(-1)

    for tau in reversed(range(level, m.n_layers)):
        layer = m.layers[tau]
        if vectors is None:
            ws = [layer.isometry(k).array for k in range(layer.n_wires_out)]
        else:
            ws = [
                layer.isometry(k).with_input(vectors[offsets[tau] + k]) for k in range(layer.n_wires_out)
            ]
        psi = apply_layer(psi, layer, ws)
    return StateVector(n_wires, dim, psi)


def layer_matrix(layer: MeraLayer, max_wires: int = MAX_LAYER_WIRES) -> np.ndarray:
    """Dense map of one layer: U_layer · (w ⊗ … ⊗ w), shape (χ_in^n, χ_out^(n/2)).

    The disentangler sublayer is a Kronecker product in the cyclically shifted wire order
    (n-1, 0, 1, …, n-2), conjugated by the permutation back to the natural order.
    """
    n, half, f = layer.n_wires_in, layer.n_wires_out, layer.chi_in
    if n > max_wires:
        raise CostGuardError(f"dense layer of {n} wires exceeds the guard of {max_wires}")
    isometries = reduce(np.kron, [layer.isometry(k).matrix() for k in range(half)])
    gates = [layer.disentangler(half - 1).matrix()] + [layer.disentangler(j).matrix() for j in range(half - 1)]
    shifted = reduce(np.kron, gates)
    side = f**n
    shift = [n - 1] + list(range(n - 1))
    perm = np.eye(side).reshape((f,) * n + (side,)).transpose(shift + [n]).reshape(side, side)
    return perm.T @ shifted @ perm @ isometries


def full_state_dense(m: Mera) -> StateVector:
    """Same state as ``full_state``, from dense layer matrices multiplied fine to coarse."""
    total = reduce(lambda acc, layer: acc @ layer_matrix(layer), m.layers[1:], layer_matrix(m.layers[0]))
    return StateVector(m.n_sites, m.site_dim, total @ m.top.array.reshape(-1))


def _check_sites(psi: StateVector, sites: Sequence[int]) -> list[int]:
    chosen = [int(s) for s in sites]
    if not chosen or len(set(chosen)) != len(chosen):
        raise ArgumentError(f"sites must be non-empty and distinct, got {chosen}")
    if any(not 0 <= s < psi.n_sites for s in chosen):
        raise ArgumentError(f"sites {chosen} outside 0..{psi.n_sites - 1}")
    return chosen


def oracle_rdm(psi: StateVector, sites: Sequence[int], max_side: int = MAX_RDM_SIDE) -> DensityMatrix:
    """Exact partial trace of |ψ⟩⟨ψ|; subsystems in the requested order."""
    chosen = _check_sites(psi, sites)
    side = psi.site_dim ** len(chosen)
    _guard(side, max_side, "reduced density matrix side")
    rest = [s for s in range(psi.n_sites) if s not in chosen]
    phi = np.transpose(psi.as_tensor(), chosen + rest).reshape(side, -1)
    return DensityMatrix((psi.site_dim,) * len(chosen), phi @ phi.conj().T)


def _apply_one_site(t: np.ndarray, op: np.ndarray, site: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(op, t, axes=([1], [site])), 0, site)


def oracle_correlator(psi: StateVector, a: np.ndarray, b: np.ndarray, s1: int, s2: int) -> complex:
    """⟨ψ|A_{s1} B_{s2}|ψ⟩ by applying both operators to the amplitudes."""
    _check_sites(psi, [s1] if s1 == s2 else [s1, s2])
    d = psi.site_dim
    if np.shape(a) != (d, d) or np.shape(b) != (d, d):
        raise ShapeError(f"one-site operators must be {d}x{d}")
    t = psi.as_tensor()
    phi = _apply_one_site(_apply_one_site(t, np.asarray(b), s2), np.asarray(a), s1)
    return complex(np.vdot(t.reshape(-1), phi.reshape(-1)))


def oracle_expectation(psi: StateVector, op: np.ndarray, sites: Sequence[int]) -> complex:
    return oracle_rdm(psi, sites).expectation(op)


def _check_same_circuit(m1: Mera, m2: Mera, tol: float) -> None:
    if (m1.n_sites, m1.site_dim) != (m2.n_sites, m2.site_dim) or len(m1.layers) != len(m2.layers):
        raise ArgumentError("networks differ in size or dimensions")
    if not (m1.has_parents and m2.has_parents):
        raise CapabilityError("overlaps of input families need parent unitaries on both networks")
    for index, (l1, l2) in enumerate(zip(m1.layers, m2.layers, strict=True)):
        if (l1.chi_in, l1.chi_out) != (l2.chi_in, l2.chi_out):
            raise ArgumentError(f"layers[{index}] dimensions differ")
        for j in range(l1.n_wires_out):
            if max_abs(l1.disentangler(j).array - l2.disentangler(j).array) > tol:
                raise ArgumentError(f"layers[{index}].disentanglers[{j}] differ beyond {tol:g}")
            if max_abs(l1.isometry(j).parent.data - l2.isometry(j).parent.data) > tol:
                raise ArgumentError(f"layers[{index}].isometries[{j}] parents differ beyond {tol:g}")
    if max_abs(m1.top.parent.data - m2.top.parent.data) > tol:
        raise ArgumentError(f"top parents differ beyond {tol:g}")


def overlap(
    m1: Mera,
    inputs1: Sequence[np.ndarray] | None,
    m2: Mera,
    inputs2: Sequence[np.ndarray] | None,
    tol: float = 1e-12,
) -> complex:
    """⟨Ψ_φ|Ψ_φ'⟩ of two input families fed through one circuit."""
    _check_same_circuit(m1, m2, tol)
    psi1 = full_state(m1, inputs1 if inputs1 is not None else default_inputs(m1))
    psi2 = full_state(m2, inputs2 if inputs2 is not None else default_inputs(m2))
    return complex(np.vdot(psi1.amplitudes, psi2.amplitudes))


def product_overlap(inputs1: Sequence[np.ndarray], inputs2: Sequence[np.ndarray]) -> complex:
    """Π_r ⟨φ_r|φ'_r⟩."""
    if len(inputs1) != len(inputs2):
        raise ArgumentError(f"input families of lengths {len(inputs1)} and {len(inputs2)}")
    return complex(math.prod(complex(np.vdot(a, b)) for a, b in zip(inputs1, inputs2, strict=True)))


def schmidt_entropy(psi: StateVector, cut: int) -> float:
    """Entanglement entropy (bits) between sites [0, cut) and [cut, N)."""
    if not 0 < cut < psi.n_sites:
        raise ArgumentError(f"cut must lie in 1..{psi.n_sites - 1}, got {cut}")
    singular = np.linalg.svd(psi.amplitudes.reshape(psi.site_dim**cut, -1), compute_uv=False)
    return entropy_of_spectrum(singular**2)


def dump_amplitudes(psi: StateVector) -> dict[str, Any]:
    return {
        "n_sites": psi.n_sites,
        "site_dim": psi.site_dim,
        "amplitudes": [[float(z.real), float(z.imag)] for z in psi.amplitudes],
    }


def load_amplitudes(doc: Any) -> StateVector:
    if not isinstance(doc, dict):
        raise LoadError("$", "amplitude document must be an object")
    for key in ("n_sites", "site_dim"):
        if not isinstance(doc.get(key), int) or isinstance(doc.get(key), bool):
            raise LoadError(key, f"expected an integer, got {doc.get(key)!r}")
    try:
        pairs = np.asarray(doc.get("amplitudes"), dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise LoadError("amplitudes", "expected a list of [re, im] pairs") from e
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise LoadError("amplitudes", "expected a list of [re, im] pairs")
    try:
        psi = StateVector(doc["n_sites"], doc["site_dim"], pairs[:, 0] + 1j * pairs[:, 1])
    except (ShapeError, ValidationError) as e:
        raise LoadError("amplitudes", str(e)) from e
    get_logger().debug(f"Loaded {psi.amplitudes.size} amplitudes for N={psi.n_sites}")
    return psi
