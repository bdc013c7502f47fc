"""Entanglement renormalization: operator flow and scale-invariant analysis.

Operators are ascended by conjugating with the layer's gates restricted to the causal cone, the
Hilbert-Schmidt adjoint of ``cone.descend_step``.
"""

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .cone import (
    WireTensor,
    causal_past,
    correlator,
    expect_local,
    is_cyclic_contiguous,
    rdm,
)
from .config import DEFAULT_MAX_AMPLITUDES, DEFAULT_MAX_CONE_WIRES
from .errors import ArgumentError, CostGuardError, DegenerateSignalError, ShapeError, StructureError, ValidationError
from .logger import get_logger
from .mera import Disentangler, Isometry, Mera, disentangler_of, disentangler_wires
from .operators import traceless
from .tensor_core import TOL_HERM, hermitian_violation, von_neumann_entropy

FLAG_R_SQUARED = 0.95
SIGNAL_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """Operator on ``support`` wires of the lattice at coarse-graining level ``level``.

    Matrix rows and columns follow the order of ``support``.
    """

    level: int
    support: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if self.level < 0:
            raise ArgumentError(f"level must be non-negative, got {self.level}")
        support = tuple(int(s) for s in self.support)
        if not support or len(set(support)) != len(support):
            raise ArgumentError(f"support must be non-empty and distinct, got {support}")
        matrix = np.array(self.matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ShapeError(f"operator matrix must be square, got {matrix.shape}")
        matrix.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "matrix", matrix)

    def is_hermitian(self, tol: float = TOL_HERM) -> bool:
        return hermitian_violation(self.matrix) <= tol


@dataclass(frozen=True)
class HamiltonianTerms:
    level: int
    terms: tuple[LocalOperator, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            if term.level != self.level:
                raise StructureError(f"term at level {term.level} in a level-{self.level} Hamiltonian")

    @property
    def max_support(self) -> int:
        return max((len(t.support) for t in self.terms), default=0)

    def __len__(self) -> int:
        return len(self.terms)


def ascend_operator(
    m: Mera, op: LocalOperator, max_wires: int | None = DEFAULT_MAX_CONE_WIRES
) -> LocalOperator:
    """Lift ``op`` from level τ to τ+1; the result acts on the cone's coarse wires in sorted order."""
    tau = op.level
    if tau >= m.n_layers:
        raise ArgumentError(f"an operator at level {tau} is already at the top and cannot ascend")
    layer = m.layers[tau]
    n, d = layer.n_wires_in, layer.chi_in
    k = len(op.support)
    if any(not 0 <= s < n for s in op.support):
        raise ArgumentError(f"support {op.support} outside 0..{n - 1} at level {tau}")
    if op.matrix.shape[0] != d**k:
        raise ShapeError(f"operator of side {op.matrix.shape[0]} does not act on {k} wires of dim {d}")

    mid, coarse = causal_past(op.support, n)
    if max_wires is not None and len(mid) > max_wires:
        raise CostGuardError(f"ascent through {len(mid)} wires exceeds the guard of {max_wires}")

    state = WireTensor(op.matrix.reshape((d,) * (2 * k)), [("m", s) for s in op.support])
    mid_set = set(mid)
    pulled: set[int] = set()

    def ensure(wire: int) -> None:
        if ("m", wire) not in state:
            state.extend_identity(("m", wire), d)

    for c in coarse:
        for wire in (2 * c, 2 * c + 1):
            if wire in mid_set:
                j = disentangler_of(wire, n)
                if j not in pulled:
                    x, y = disentangler_wires(j, n)
                    ensure(x)
                    ensure(y)
                    state.pull_gate(("m", x), ("m", y), layer.disentangler(j).array)
                    pulled.add(j)
            else:
                ensure(wire)
        state.pull_isometry(("m", 2 * c), ("m", 2 * c + 1), layer.isometry(c).array, ("c", c))

    data = state.reordered([("c", c) for c in coarse])
    side = layer.chi_out ** len(coarse)
    return LocalOperator(tau + 1, coarse, data.reshape(side, side))


def effective_hamiltonians(m: Mera, h0: HamiltonianTerms) -> list[HamiltonianTerms]:
    """H_0, H_1, …, H_L: every term ascended individually, terms on equal supports summed."""
    if h0.level != 0:
        raise ArgumentError(f"the flow starts from a level-0 Hamiltonian, got level {h0.level}")
    for index, term in enumerate(h0.terms):
        if len(term.support) > 2:
            raise ArgumentError(f"term {index} acts on {len(term.support)} sites; expected at most 2")
        violation = hermitian_violation(term.matrix)
        if violation > TOL_HERM:
            raise ValidationError(f"term {index} on {term.support} is not Hermitian (violation {violation:.3e})")

    flow = [h0]
    current = h0
    for tau in range(m.n_layers):
        summed: dict[tuple[int, ...], np.ndarray] = {}
        for term in current.terms:
            lifted = ascend_operator(m, term)
            if lifted.support in summed:
                summed[lifted.support] = summed[lifted.support] + lifted.matrix
            else:
                summed[lifted.support] = np.array(lifted.matrix)
        current = HamiltonianTerms(
            tau + 1, tuple(LocalOperator(tau + 1, s, mat) for s, mat in sorted(summed.items()))
        )
        get_logger().debug(f"H_{tau + 1}: {len(current)} terms, max support {current.max_support}")
        flow.append(current)
    return flow


def hamiltonian_expectation(m: Mera, h: HamiltonianTerms) -> float:
    """Σ_terms tr(ρ_τ h) at the Hamiltonian's own level."""
    return sum((expect_local(m, term).value for term in h.terms), 0j).real


def embed_one_site(op: np.ndarray, site: int) -> np.ndarray:
    """Place a one-site operator on its disentangler pair (2c-1, 2c) or (2c+1, 2c+2).

    Even sites are the second wire of their pair, odd sites the first.
    """
    op = np.asarray(op, dtype=np.complex128)
    identity = np.eye(op.shape[0], dtype=np.complex128)
    return np.kron(identity, op) if site % 2 == 0 else np.kron(op, identity)


def scaling_superoperator(u: Disentangler, w: Isometry) -> np.ndarray:
    """Scaling map on the two wires of one disentangler, as a χ⁴×χ⁴ matrix on row-major vectorized operators.

    An operator on fine wires (2c-1, 2c) is conjugated by disentangler c-1 and the isometries c-1, c,
    landing on coarse wires (c-1, c): the same kind of pair one level up. Every one-site operator enters
    this window after its first ascent (see ``embed_one_site``), so its spectrum sets the decay of
    one-site operators at either parity.
    """
    chi = u.chi
    if (w.chi_fine, w.chi_coarse) != (chi, chi):
        raise StructureError(f"scaling map needs uniform χ, got u: {chi}, w: ({w.chi_fine}, {w.chi_coarse})")
    identity = np.eye(chi, dtype=np.complex128)
    v = np.kron(identity, np.kron(u.matrix(), identity)) @ np.kron(w.matrix(), w.matrix())
    v = v.reshape(chi, chi * chi, chi, chi * chi)
    return np.einsum("pmqc,pnqd->cdmn", v.conj(), v).reshape(chi**4, chi**4)


def scaling_spectrum(u: Disentangler, w: Isometry) -> np.ndarray:
    """Eigenvalues of the scaling map sorted by decreasing magnitude."""
    eigenvalues = linalg.eigvals(scaling_superoperator(u, w))
    return eigenvalues[np.argsort(-np.abs(eigenvalues), kind="stable")]


def exponent_from_spectrum(eigenvalues: np.ndarray) -> float:
    """−log₂|λ₂| after removing one eigenvalue closest to 1; inf when nothing decays slower than 0."""
    eigenvalues = np.asarray(eigenvalues)
    if eigenvalues.size < 2:
        return math.inf
    rest = np.delete(eigenvalues, np.argmin(np.abs(eigenvalues - 1.0)))
    lam2 = float(np.max(np.abs(rest)))
    if lam2 == 0.0:
        return math.inf
    return -math.log2(lam2)


@dataclass(frozen=True)
class ExponentFit:
    distances: tuple[int, ...]
    correlators: tuple[complex, ...]
    q_fit: float
    q_eig: float
    q_pair: float
    r_squared: float
    flagged: bool
    relative_deviation: float

    def to_dict(self) -> dict:
        return {
            "distances": list(self.distances),
            "correlators": [[c.real, c.imag] for c in self.correlators],
            "q_fit": self.q_fit,
            "q_eig": self.q_eig,
            "q_pair": self.q_pair,
            "r_squared": self.r_squared,
            "flagged": self.flagged,
            "relative_deviation": self.relative_deviation,
        }


def _check_distances(distances: Sequence[int], n_sites: int) -> list[int]:
    values = [int(r) for r in distances]
    if len(values) < 2:
        raise ArgumentError(f"a fit needs at least two distances, got {values}")
    for r in values:
        if r < 1 or r & (r - 1):
            raise ArgumentError(f"distance {r} is not a power of two")
        if r > n_sites // 4:
            raise ArgumentError(f"distance {r} exceeds N/4 = {n_sites // 4}")
    return values


def correlation_exponent(
    m: Mera,
    a: np.ndarray,
    b: np.ndarray,
    distances: Sequence[int],
    *,
    site: int = 0,
    project_traceless: bool = True,
    connected: bool = True,
) -> ExponentFit:
    """Power-law exponent of ⟨A_s B_{s+r}⟩ fitted over ``distances`` and from the scaling spectrum.

    ``relative_deviation`` compares ``q_fit`` with ``q_pair`` = 2·``q_eig``, the decay of a correlator
    whose two operators each shrink by |λ₂| per layer.
    """
    if not m.scale_invariant:
        raise ArgumentError("correlation exponents need a scale-invariant network")
    values = _check_distances(distances, m.n_sites)
    if project_traceless:
        a, b = traceless(a), traceless(b)
    correlators: list[complex] = []
    for r in values:
        other = (site + r) % m.n_sites
        c = correlator(m, a, b, site, other)
        if connected:
            c -= expect_local(m, LocalOperator(0, (site,), a)).value * expect_local(m, LocalOperator(0, (other,), b)).value
        correlators.append(c)

    magnitudes = np.abs(np.array(correlators))
    usable = magnitudes > SIGNAL_FLOOR
    if not usable.any():
        raise DegenerateSignalError(f"every correlator is below {SIGNAL_FLOOR:g}")
    if usable.sum() < 2:
        raise DegenerateSignalError("fewer than two correlators above the noise floor")
    x = np.log2(np.array(values, dtype=float)[usable])
    y = np.log2(magnitudes[usable])
    slope, intercept = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 1e-24 else 1.0

    layer = m.layers[0]
    q_eig = exponent_from_spectrum(scaling_spectrum(layer.disentangler(0), layer.isometry(0)))
    q_pair = 2 * q_eig
    q_fit = float(-slope)
    if math.isfinite(q_pair) and q_pair > 0:
        deviation = abs(q_fit - q_pair) / q_pair
    else:
        deviation = math.inf
    fit = ExponentFit(
        distances=tuple(values),
        correlators=tuple(correlators),
        q_fit=q_fit,
        q_eig=q_eig,
        q_pair=q_pair,
        r_squared=r_squared,
        flagged=r_squared < FLAG_R_SQUARED,
        relative_deviation=deviation,
    )
    get_logger().debug(f"exponent fit: q_fit={fit.q_fit:.4f} q_eig={fit.q_eig:.4f} R²={fit.r_squared:.4f}")
    return fit


@dataclass(frozen=True)
class BlockEntropy:
    length: int
    entropy_bits: float
    bound_bits: float
    method: str

    @property
    def within_bound(self) -> bool:
        return self.entropy_bits <= self.bound_bits

    def to_dict(self) -> dict:
        return {**vars(self), "within_bound": self.within_bound}


def entropy_bound(length: int, chi_max: int) -> float:
    """log₂χ·(4 + 2τ̄), τ̄ = ⌈log₂ l⌉ + 1: a four-wire top window plus two boundary wires per layer."""
    if length < 1:
        raise ArgumentError(f"block length must be positive, got {length}")
    steps = math.ceil(math.log2(length)) + 1
    return math.log2(chi_max) * (4 + 2 * steps)


def block_entropy(
    m: Mera,
    block: Iterable[int],
    method: str = "cone",
    max_amplitudes: int = DEFAULT_MAX_AMPLITUDES,
) -> BlockEntropy:
    """Entropy of a contiguous block with its logarithmic bound.

    Args:
        method: ``cone`` (at most four sites), ``oracle`` (state vector) or ``guard``
            (cone when it fits, oracle otherwise)
    """
    sites = [int(s) for s in block]
    if not sites or len(set(sites)) != len(sites):
        raise ArgumentError(f"block must be non-empty and distinct, got {sites}")
    if not is_cyclic_contiguous(sites, m.n_sites):
        raise ArgumentError(f"block {sites} is not contiguous")
    if method == "guard":
        method = "cone" if len(sites) <= 4 else "oracle"

    if method == "cone":
        rho = rdm(m, sites)
    elif method == "oracle":
        from .oracle import full_state, oracle_rdm

        rho = oracle_rdm(full_state(m, max_amplitudes=max_amplitudes), sites)
    else:
        raise ArgumentError(f"unknown entropy method {method!r}; choose cone, oracle or guard")
    return BlockEntropy(len(sites), von_neumann_entropy(rho), entropy_bound(len(sites), m.chi_max), method)
