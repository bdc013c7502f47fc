"""Causal cones and reduced density matrices.

The causal past of a set of wires at level τ is found in two steps: the disentanglers touching
the wires give the mid wires, the isometries feeding those give the coarse wires at level τ+1.
For contiguous sets the slices stay at most 3 level wires and 4 mid wires wide, so every
descent step costs O(χ^c) with c independent of N.
"""

from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .config import DEFAULT_MAX_CONE_WIRES
from .errors import ArgumentError, CostGuardError, StructureError, ValidationError
from .logger import get_logger
from .mera import Mera, MeraLayer, disentangler_of, disentangler_wires, layer_count
from .tensor_core import (
    TOL_HERM,
    DensityMatrix,
    hermitian_violation,
    partial_trace,
    permute_subsystems,
)

if TYPE_CHECKING:
    from .renorm import LocalOperator

DEFAULT_MAX_K = 4


class WireTensor:
    """Ket/bra tensor whose axes are keyed by wire labels.

    ``data`` holds one ket axis per label (in ``labels`` order) followed by the matching bra axes.
    States are pushed down the circuit (ρ → GρG†); operators are pulled up (O → G†OG).
    """

    def __init__(self, data: np.ndarray, labels: Iterable[Hashable]) -> None:
        self.labels = list(labels)
        self.data = data
        if data.ndim != 2 * len(self.labels):
            raise StructureError(f"tensor of rank {data.ndim} for {len(self.labels)} wires")

    def _subscripts(self) -> tuple[list[int], list[int], int]:
        k = len(self.labels)
        return list(range(k)), list(range(k, 2 * k)), 2 * k

    def position(self, label: Hashable) -> int:
        return self.labels.index(label)

    def __contains__(self, label: Hashable) -> bool:
        return label in self.labels

    def trace_out(self, label: Hashable) -> None:
        ket, bra, _ = self._subscripts()
        p = self.position(label)
        bra[p] = ket[p]
        out = [s for i, s in enumerate(ket) if i != p] + [s for i, s in enumerate(bra) if i != p]
        self.data = np.einsum(self.data, ket + bra, out)
        del self.labels[p]

    def extend_identity(self, label: Hashable, dim: int) -> None:
        """O → O ⊗ 1 on a new wire."""
        ket, bra, f = self._subscripts()
        self.data = np.einsum(self.data, ket + bra, np.eye(dim), [f, f + 1], ket + [f] + bra + [f + 1])
        self.labels.append(label)

    def push_isometry(self, label: Hashable, w: np.ndarray, new_labels: tuple[Hashable, Hashable]) -> None:
        """ρ → w ρ w† replacing one coarse wire by two fine wires."""
        ket, bra, f = self._subscripts()
        p = self.position(label)
        a, b, a_, b_ = f, f + 1, f + 2, f + 3
        out = ket[:p] + [a, b] + ket[p + 1 :] + bra[:p] + [a_, b_] + bra[p + 1 :]
        self.data = np.einsum(
            w, [a, b, ket[p]], self.data, ket + bra, w.conj(), [a_, b_, bra[p]], out, optimize=True
        )
        self.labels[p : p + 1] = list(new_labels)

    def push_gate(self, label1: Hashable, label2: Hashable, u: np.ndarray) -> None:
        """ρ → u ρ u† with ``label1`` on the in1 axis."""
        ket, bra, f = self._subscripts()
        p, q = self.position(label1), self.position(label2)
        o1, o2, o1_, o2_ = f, f + 1, f + 2, f + 3
        out_ket, out_bra = list(ket), list(bra)
        out_ket[p], out_ket[q], out_bra[p], out_bra[q] = o1, o2, o1_, o2_
        self.data = np.einsum(
            u, [o1, o2, ket[p], ket[q]], self.data, ket + bra, u.conj(), [o1_, o2_, bra[p], bra[q]],
            out_ket + out_bra, optimize=True,
        )

    def pull_gate(self, label1: Hashable, label2: Hashable, u: np.ndarray) -> None:
        """O → u† O u with ``label1`` on the out1 axis."""
        ket, bra, f = self._subscripts()
        p, q = self.position(label1), self.position(label2)
        i1, i2, i1_, i2_ = f, f + 1, f + 2, f + 3
        out_ket, out_bra = list(ket), list(bra)
        out_ket[p], out_ket[q], out_bra[p], out_bra[q] = i1, i2, i1_, i2_
        self.data = np.einsum(
            u.conj(), [ket[p], ket[q], i1, i2], self.data, ket + bra, u, [bra[p], bra[q], i1_, i2_],
            out_ket + out_bra, optimize=True,
        )

    def pull_isometry(self, label1: Hashable, label2: Hashable, w: np.ndarray, new_label: Hashable) -> None:
        """O → w† O w merging two fine wires into one coarse wire (appended last)."""
        ket, bra, f = self._subscripts()
        p, q = self.position(label1), self.position(label2)
        i, i_ = f, f + 1
        keep = [x for x in range(len(self.labels)) if x not in (p, q)]
        out = [ket[x] for x in keep] + [i] + [bra[x] for x in keep] + [i_]
        self.data = np.einsum(
            w.conj(), [ket[p], ket[q], i], self.data, ket + bra, w, [bra[p], bra[q], i_], out, optimize=True
        )
        self.labels = [self.labels[x] for x in keep] + [new_label]

    def reordered(self, labels: Sequence[Hashable]) -> np.ndarray:
        if sorted(map(str, labels)) != sorted(map(str, self.labels)):
            raise StructureError(f"cannot reorder wires {self.labels} as {list(labels)}")
        perm = [self.position(label) for label in labels]
        k = len(perm)
        return np.transpose(self.data, perm + [p + k for p in perm])


@dataclass(frozen=True)
class CausalSlice:
    """Wires of the causal cone at one level, plus the mid wires of the layer below it."""

    level: int
    wires: tuple[int, ...]
    mid_wires: tuple[int, ...] = ()

    @property
    def width(self) -> int:
        return max(len(self.wires), len(self.mid_wires))


@dataclass(frozen=True)
class ConeSlice:
    """Reduced state of the cone wires at one level; subsystems follow sorted ``wires``."""

    layer_index: int
    wires: tuple[int, ...]
    sigma: DensityMatrix

    def __post_init__(self) -> None:
        if list(self.wires) != sorted(set(self.wires)):
            raise StructureError(f"cone wires must be sorted and distinct, got {self.wires}")
        if len(self.wires) != self.sigma.n_subsystems:
            raise StructureError(f"{len(self.wires)} wires for a state on {self.sigma.n_subsystems} subsystems")


def causal_past(wires: Iterable[int], n_wires: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Mid wires and coarse wires reached by one layer from ``wires``."""
    mid: set[int] = set()
    for wire in wires:
        mid.update(disentangler_wires(disentangler_of(wire, n_wires), n_wires))
    coarse = {m // 2 for m in mid}
    return tuple(sorted(mid)), tuple(sorted(coarse))


def is_cyclic_contiguous(sites: Iterable[int], n: int) -> bool:
    chosen = set(sites)
    if len(chosen) in (0, n):
        return len(chosen) == n
    ends = sum(1 for s in chosen if (s + 1) % n not in chosen)
    return ends == 1


def cone_levels(n_sites: int, sites: Iterable[int], level: int = 0) -> list[CausalSlice]:
    """Causal slices from ``level`` up to the top, for a system of ``n_sites`` sites."""
    n_layers = layer_count(n_sites)
    if not 0 <= level <= n_layers:
        raise ArgumentError(f"level {level} outside 0..{n_layers}")
    current = sorted(set(int(s) for s in sites))
    n = n_sites >> level
    if not current:
        raise ArgumentError("the site set is empty")
    if current[0] < 0 or current[-1] >= n:
        raise ArgumentError(f"sites {current} outside 0..{n - 1} at level {level}")

    slices = []
    for tau in range(level, n_layers):
        mid, coarse = causal_past(current, n)
        slices.append(CausalSlice(tau, tuple(current), mid))
        current, n = list(coarse), n // 2
    slices.append(CausalSlice(n_layers, tuple(current)))
    return slices


def cone_of(m: Mera, sites: Iterable[int], level: int = 0) -> list[CausalSlice]:
    return cone_levels(m.n_sites, sites, level)


def descend_step(
    upper: ConeSlice,
    layer: MeraLayer,
    target_wires: Iterable[int],
    max_wires: int | None = DEFAULT_MAX_CONE_WIRES,
) -> ConeSlice:
    """Push the cone state through one layer and keep only ``target_wires``.

    Isometries are applied one at a time; wires outside the mid set are traced as soon as they
    appear and every disentangler is applied as soon as both its inputs exist, which keeps the
    working tensor at a handful of wires.
    """
    n = layer.n_wires_in
    targets = sorted(set(int(t) for t in target_wires))
    if not targets or targets[0] < 0 or targets[-1] >= n:
        raise StructureError(f"target wires {targets} outside 0..{n - 1}")
    if upper.layer_index < 1:
        raise StructureError("a level-0 slice cannot descend further")
    if any(k >= layer.n_wires_out for k in upper.wires):
        raise StructureError(f"slice wires {upper.wires} do not fit a layer of {layer.n_wires_out} outputs")

    mid, needed = causal_past(targets, n)
    if max_wires is not None and len(mid) > max_wires:
        raise CostGuardError(f"cone slice of {len(mid)} wires exceeds the guard of {max_wires}")
    missing = set(needed) - set(upper.wires)
    if missing:
        raise StructureError(f"slice lacks coarse wires {sorted(missing)} needed for targets {targets}")

    state = WireTensor(upper.sigma.as_tensor(), [("c", k) for k in upper.wires])
    for k in upper.wires:
        if k not in needed:
            state.trace_out(("c", k))

    mid_set, target_set = set(mid), set(targets)
    pending = sorted({disentangler_of(wire, n) for wire in mid})
    present: set[int] = set()
    for k in needed:
        a, b = 2 * k, 2 * k + 1
        state.push_isometry(("c", k), layer.isometry(k).array, (("m", a), ("m", b)))
        for wire in (a, b):
            if wire in mid_set:
                present.add(wire)
            else:
                state.trace_out(("m", wire))
        for j in list(pending):
            x, y = disentangler_wires(j, n)
            if x in present and y in present:
                state.push_gate(("m", x), ("m", y), layer.disentangler(j).array)
                pending.remove(j)
                for wire in (x, y):
                    if wire not in target_set:
                        state.trace_out(("m", wire))
    if pending:
        raise StructureError(f"disentanglers {pending} never received both inputs")

    data = state.reordered([("m", t) for t in targets])
    side = layer.chi_in ** len(targets)
    sigma = DensityMatrix((layer.chi_in,) * len(targets), data.reshape(side, side))
    return ConeSlice(upper.layer_index - 1, tuple(targets), sigma)


def top_density(m: Mera) -> DensityMatrix:
    """t t† on the two top wires."""
    vec = m.top.array.reshape(-1)
    return DensityMatrix((m.top.chi, m.top.chi), np.outer(vec, vec.conj()))


def rdm(
    m: Mera,
    sites: Sequence[int],
    *,
    level: int = 0,
    max_k: int = DEFAULT_MAX_K,
    override: bool = False,
    max_wires: int | None = DEFAULT_MAX_CONE_WIRES,
) -> DensityMatrix:
    """Reduced density matrix of ``sites`` at ``level``, subsystems in the requested order.

    Args:
        m: the network
        sites: distinct sites; more than two must form a (cyclically) contiguous block
        level: lattice level the sites live on (0 = physical sites)
        max_k: largest site set accepted without ``override``
        override: lift the site-count, contiguity and cone-width guards

    Raises:
        CostGuardError: when the set is larger than ``max_k`` or the cone exceeds ``max_wires``
    """
    requested = [int(s) for s in sites]
    if not requested:
        raise ArgumentError("rdm needs at least one site")
    if len(set(requested)) != len(requested):
        raise ArgumentError(f"duplicate sites in {requested}")
    n = m.wire_count(level)
    if not override:
        if len(requested) > max_k:
            raise CostGuardError(f"{len(requested)} sites exceed the guard of {max_k}; pass override to force")
        if len(requested) > 2 and not is_cyclic_contiguous(requested, n):
            raise ArgumentError(f"sites {requested} are not a contiguous block")
    else:
        max_wires = None

    slices = cone_of(m, requested, level)
    top_wires = slices[-1].wires
    current = ConeSlice(m.n_layers, top_wires, partial_trace(top_density(m), top_wires))
    for causal in reversed(slices[:-1]):
        current = descend_step(current, m.layers[causal.level], causal.wires, max_wires)

    get_logger().debug(
        f"rdm of {requested} at level {level}: cone widths {[s.width for s in slices]}"
    )
    order = [current.wires.index(s) for s in requested]
    return permute_subsystems(current.sigma, order)


@dataclass(frozen=True)
class Expectation:
    value: complex
    imag_residual: float
    hermitian: bool

    @property
    def real(self) -> float:
        return self.value.real

    def __complex__(self) -> complex:
        return self.value


def expect_local(m: Mera, op: "LocalOperator", *, max_k: int = DEFAULT_MAX_K, override: bool = False) -> Expectation:
    """tr(ρ O) for a local operator at its own level.

    Hermitian operators give real values; an imaginary residual above 1e-10 is an error.
    """
    rho = rdm(m, op.support, level=op.level, max_k=max_k, override=override)
    value = rho.expectation(op.matrix)
    hermitian = hermitian_violation(op.matrix) <= TOL_HERM
    if not hermitian:
        return Expectation(value, abs(value.imag), False)
    residual = abs(value.imag)
    if residual > 1e-10:
        raise ValidationError(f"Hermitian operator has expectation with imaginary part {residual:.3e}")
    return Expectation(complex(value.real, 0.0), residual, True)


def correlator(m: Mera, a: np.ndarray, b: np.ndarray, s1: int, s2: int) -> complex:
    """⟨A_{s1} B_{s2}⟩ from the two-site reduced state."""
    if s1 == s2:
        raise ArgumentError(f"correlator needs two distinct sites, got {s1} twice")
    d = m.site_dim
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != (d, d) or b.shape != (d, d):
        raise ArgumentError(f"one-site operators must be {d}x{d}, got {a.shape} and {b.shape}")
    rho = rdm(m, [s1, s2])
    return rho.expectation(np.kron(a, b))

