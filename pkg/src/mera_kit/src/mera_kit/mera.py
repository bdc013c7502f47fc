"""The MERA data model for 1D binary coarse-graining.

Wiring convention (periodic boundary, ``n`` fine wires entering a layer from below):

* disentangler ``j`` acts on fine wires ``(2j+1, (2j+2) mod n)``;
* isometry ``j`` then maps the wire pair ``(2j, 2j+1)`` to coarse wire ``j``.

Tensor axes follow the circuit picture: ``out`` axes point toward the lattice, ``in`` axes
toward the top tensor.

* Disentangler ``(out1, out2, in1, in2)``, dims ``(χ, χ, χ, χ)``
* Isometry ``(out1, out2, in)``, dims ``(χ_fine, χ_fine, χ_coarse)``
* TopTensor ``(out1, out2)``, dims ``(χ_top, χ_top)``

Optional parent unitaries keep the incoming ``|0⟩`` wire explicit:
isometry parent ``(out1, out2, in, ancilla)`` with ``w = parent[..., 0]`` and top parent
``(out1, out2, in1, in2)`` with ``t = parent[:, :, 0, 0]``.
"""

import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from .errors import ArgumentError, StructureError
from .logger import get_logger
from .tensor_core import Tensor, max_abs, random_isometry

U_AXES = ("out1", "out2", "in1", "in2")
W_AXES = ("out1", "out2", "in")
W_PARENT_AXES = ("out1", "out2", "in", "ancilla")
T_AXES = ("out1", "out2")

CONSTRAINT_TOL = 1e-10


class MeraMode(StrEnum):
    GENERIC = "generic"
    TRANSLATION_INVARIANT = "translation_invariant"
    SCALE_INVARIANT = "scale_invariant"


def _as_tensor(value: Tensor | np.ndarray, axes: tuple[str, ...]) -> Tensor:
    if isinstance(value, Tensor):
        if value.axes != axes:
            if value.rank != len(axes):
                raise StructureError(f"expected axes {axes}, got {value.axes}")
            return Tensor(value.data, axes)
        return value
    return Tensor(np.asarray(value), axes)


def _unitarity_violation(matrix: np.ndarray) -> float:
    eye = np.eye(matrix.shape[1])
    return max_abs(matrix.conj().T @ matrix - eye)


@dataclass(frozen=True, eq=False)
class Disentangler:
    tensor: Tensor

    def __post_init__(self) -> None:
        tensor = _as_tensor(self.tensor, U_AXES)
        if tensor.rank != 4 or len(set(tensor.shape)) != 1:
            raise StructureError(f"disentangler must have dims (χ, χ, χ, χ), got {tensor.shape}")
        object.__setattr__(self, "tensor", tensor)

    @property
    def array(self) -> np.ndarray:
        return self.tensor.data

    @property
    def chi(self) -> int:
        return self.tensor.shape[0]

    def matrix(self) -> np.ndarray:
        """Rows (out1, out2), columns (in1, in2)."""
        return self.array.reshape(self.chi**2, self.chi**2)

    def violation(self) -> float:
        """Worst of the two unitarity constraints (sum over outputs, sum over inputs)."""
        u = self.matrix()
        return max(_unitarity_violation(u), _unitarity_violation(u.conj().T))


@dataclass(frozen=True, eq=False)
class Isometry:
    tensor: Tensor
    parent: Tensor | None = None

    def __post_init__(self) -> None:
        tensor = _as_tensor(self.tensor, W_AXES)
        fine, fine2, coarse = tensor.shape
        if fine != fine2:
            raise StructureError(f"isometry outputs must share one dimension, got {tensor.shape}")
        if coarse > fine * fine:
            raise StructureError(f"isometry coarse dim {coarse} exceeds χ_fine² = {fine * fine}")
        object.__setattr__(self, "tensor", tensor)
        if self.parent is not None:
            parent = _as_tensor(self.parent, W_PARENT_AXES)
            if parent.shape[:3] != tensor.shape or math.prod(parent.shape) != fine**4:
                raise StructureError(
                    f"isometry parent of dims {parent.shape} does not extend {tensor.shape}"
                )
            object.__setattr__(self, "parent", parent)

    @property
    def array(self) -> np.ndarray:
        return self.tensor.data

    @property
    def chi_fine(self) -> int:
        return self.tensor.shape[0]

    @property
    def chi_coarse(self) -> int:
        return self.tensor.shape[2]

    @property
    def ancilla_dim(self) -> int:
        return self.chi_fine**2 // self.chi_coarse

    def matrix(self) -> np.ndarray:
        """Rows (out1, out2), columns in."""
        return self.array.reshape(self.chi_fine**2, self.chi_coarse)

    def violation(self) -> float:
        return _unitarity_violation(self.matrix())

    def parent_violation(self) -> float:
        """Unitarity of the parent plus its agreement with w on the |0⟩ ancilla."""
        if self.parent is None:
            return 0.0
        side = self.chi_fine**2
        unitary = self.parent.data.reshape(side, side)
        return max(
            _unitarity_violation(unitary),
            _unitarity_violation(unitary.conj().T),
            max_abs(self.parent.data[..., 0] - self.array),
        )

    def with_input(self, phi: np.ndarray) -> np.ndarray:
        """The isometry obtained by feeding ``phi`` into the parent's ancilla wire."""
        if self.parent is None:
            raise StructureError("isometry carries no parent unitary")
        return np.einsum("xyab,b->xya", self.parent.data, phi)


@dataclass(frozen=True, eq=False)
class TopTensor:
    tensor: Tensor
    parent: Tensor | None = None

    def __post_init__(self) -> None:
        tensor = _as_tensor(self.tensor, T_AXES)
        if tensor.shape[0] != tensor.shape[1]:
            raise StructureError(f"top tensor must be χ×χ, got {tensor.shape}")
        object.__setattr__(self, "tensor", tensor)
        if self.parent is not None:
            parent = _as_tensor(self.parent, U_AXES)
            if parent.shape != tensor.shape * 2:
                raise StructureError(f"top parent of dims {parent.shape} does not match {tensor.shape}")
            object.__setattr__(self, "parent", parent)

    @property
    def array(self) -> np.ndarray:
        return self.tensor.data

    @property
    def chi(self) -> int:
        return self.tensor.shape[0]

    def violation(self) -> float:
        return abs(float(np.sum(np.abs(self.array) ** 2)) - 1.0)

    def parent_violation(self) -> float:
        if self.parent is None:
            return 0.0
        side = self.chi**2
        unitary = self.parent.data.reshape(side, side)
        return max(
            _unitarity_violation(unitary),
            _unitarity_violation(unitary.conj().T),
            max_abs(self.parent.data[:, :, 0, 0] - self.array),
        )

    def with_inputs(self, phi1: np.ndarray, phi2: np.ndarray) -> np.ndarray:
        if self.parent is None:
            raise StructureError("top tensor carries no parent unitary")
        return np.einsum("xyab,a,b->xy", self.parent.data, phi1, phi2)


@dataclass(frozen=True, eq=False)
class MeraLayer:
    """One coarse-graining step: ``n_wires_in`` wires of dim ``chi_in`` → half as many of ``chi_out``.

    A shared layer stores a single disentangler and a single isometry reused in every slot.
    """

    n_wires_in: int
    chi_in: int
    chi_out: int
    disentanglers: tuple[Disentangler, ...]
    isometries: tuple[Isometry, ...]
    shared: bool = False

    def __post_init__(self) -> None:
        n = self.n_wires_in
        if n < 4 or n % 2:
            raise StructureError(f"a layer needs an even number >= 4 of wires, got {n}")
        object.__setattr__(self, "disentanglers", tuple(self.disentanglers))
        object.__setattr__(self, "isometries", tuple(self.isometries))
        expected = 1 if self.shared else n // 2
        for kind, stored in (("disentanglers", self.disentanglers), ("isometries", self.isometries)):
            if len(stored) != expected:
                raise StructureError(f"layer with {n} wires stores {len(stored)} {kind}, expected {expected}")
        for u in self.disentanglers:
            if u.chi != self.chi_in:
                raise StructureError(f"disentangler dim {u.chi} does not match chi_in={self.chi_in}")
        for w in self.isometries:
            if (w.chi_fine, w.chi_coarse) != (self.chi_in, self.chi_out):
                raise StructureError(
                    f"isometry dims ({w.chi_fine}, {w.chi_coarse}) do not match "
                    f"(chi_in={self.chi_in}, chi_out={self.chi_out})"
                )

    @property
    def n_wires_out(self) -> int:
        return self.n_wires_in // 2

    def disentangler(self, j: int) -> Disentangler:
        if not 0 <= j < self.n_wires_out:
            raise ArgumentError(f"disentangler {j} out of range for {self.n_wires_in} wires")
        return self.disentanglers[0 if self.shared else j]

    def isometry(self, k: int) -> Isometry:
        if not 0 <= k < self.n_wires_out:
            raise ArgumentError(f"isometry {k} out of range for {self.n_wires_in} wires")
        return self.isometries[0 if self.shared else k]


def layer_count(n_sites: int) -> int:
    """Number of layers, log₂N − 1, for N = 2^k with k >= 2."""
    if n_sites < 4 or n_sites & (n_sites - 1):
        raise ArgumentError(f"n_sites must be a power of two >= 4, got {n_sites}")
    return n_sites.bit_length() - 2


@dataclass(frozen=True, eq=False)
class Mera:
    n_sites: int
    site_dim: int
    layers: tuple[MeraLayer, ...]
    top: TopTensor
    mode: MeraMode = MeraMode.GENERIC

    def __post_init__(self) -> None:
        try:
            expected = layer_count(self.n_sites)
        except ArgumentError as e:
            raise StructureError(str(e)) from e
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "mode", MeraMode(self.mode))
        if len(self.layers) != expected:
            raise StructureError(f"N={self.n_sites} needs {expected} layers, got {len(self.layers)}")

        n, chi = self.n_sites, self.site_dim
        for index, layer in enumerate(self.layers):
            if layer.n_wires_in != n:
                raise StructureError(f"layers[{index}] takes {layer.n_wires_in} wires, expected {n}")
            if layer.chi_in != chi:
                raise StructureError(f"layers[{index}].chi_in={layer.chi_in}, expected {chi}")
            n, chi = layer.n_wires_out, layer.chi_out
        if self.top.chi != chi:
            raise StructureError(f"top dims {self.top.tensor.shape} do not match chi_out={chi}")

        if self.mode is not MeraMode.GENERIC and not all(layer.shared for layer in self.layers):
            raise StructureError(f"mode {self.mode} requires every layer to be shared")
        if self.mode is MeraMode.SCALE_INVARIANT:
            first = self.layers[0]
            if first.chi_in != first.chi_out:
                raise StructureError("scale-invariant networks need site_dim == chi")
            for index, layer in enumerate(self.layers[1:], start=1):
                same_u = np.array_equal(layer.disentanglers[0].array, first.disentanglers[0].array)
                same_w = np.array_equal(layer.isometries[0].array, first.isometries[0].array)
                if not (same_u and same_w):
                    raise StructureError(f"layers[{index}] differs from layers[0] in a scale-invariant network")

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def scale_invariant(self) -> bool:
        return self.mode is MeraMode.SCALE_INVARIANT

    @property
    def depth(self) -> int:
        """Circuit time slices: one for the top gate, two per layer (2·log₂N − 1)."""
        return 2 * self.n_layers + 1

    @property
    def chi_max(self) -> int:
        return max([self.site_dim] + [layer.chi_out for layer in self.layers])

    @property
    def has_parents(self) -> bool:
        return self.top.parent is not None and all(
            w.parent is not None for layer in self.layers for w in layer.isometries
        )

    def wire_count(self, level: int) -> int:
        """Number of wires of the lattice at coarse-graining level ``level`` (0 = sites)."""
        if not 0 <= level <= self.n_layers:
            raise ArgumentError(f"level {level} outside 0..{self.n_layers}")
        return self.n_sites >> level

    def wire_dim(self, level: int) -> int:
        if not 0 <= level <= self.n_layers:
            raise ArgumentError(f"level {level} outside 0..{self.n_layers}")
        return self.site_dim if level == 0 else self.layers[level - 1].chi_out


@dataclass(frozen=True)
class GatePlacement:
    kind: str
    layer_index: int
    index: int
    fine_wires: tuple[int, int]
    coarse_wire: int | None = None


def disentangler_wires(j: int, n_wires: int) -> tuple[int, int]:
    return (2 * j + 1, (2 * j + 2) % n_wires)


def disentangler_of(wire: int, n_wires: int) -> int:
    """Index of the disentangler touching fine wire ``wire``."""
    if wire % 2:
        return (wire - 1) // 2
    return (wire // 2 - 1) % (n_wires // 2)


def wiring(layer_index: int, n_wires: int) -> list[GatePlacement]:
    """Gate placements of one layer: all disentanglers, then all isometries."""
    if n_wires % 2:
        raise StructureError(f"a layer cannot act on an odd number of wires ({n_wires})")
    if n_wires < 4:
        raise StructureError(f"a layer needs at least 4 wires, got {n_wires}")
    half = n_wires // 2
    placements = [
        GatePlacement("disentangler", layer_index, j, disentangler_wires(j, n_wires)) for j in range(half)
    ]
    placements += [GatePlacement("isometry", layer_index, k, (2 * k, 2 * k + 1), k) for k in range(half)]
    return placements


def _chi_chain(n_layers: int, chi: int | list[int], site_dim: int | None) -> tuple[int, list[int]]:
    if isinstance(chi, int):
        chis = [chi] * n_layers
    else:
        chis = [int(c) for c in chi]
        if len(chis) != n_layers:
            raise ArgumentError(f"per-layer chi needs {n_layers} entries, got {len(chis)}")
    if site_dim is None:
        site_dim = chis[0]
    if site_dim < 2 or any(c < 2 for c in chis):
        raise ArgumentError(f"dimensions must be >= 2, got site_dim={site_dim}, chi={chis}")
    fine = site_dim
    for index, coarse in enumerate(chis):
        if coarse > fine * fine:
            raise ArgumentError(f"layer {index}: χ_coarse={coarse} exceeds χ_fine²={fine * fine}")
        fine = coarse
    return site_dim, chis


def _draw_disentangler(chi: int, seed: int) -> Disentangler:
    u = random_isometry(chi * chi, chi * chi, seed).data
    return Disentangler(Tensor(u.reshape(chi, chi, chi, chi), U_AXES))


def _draw_isometry(fine: int, coarse: int, seed: int, keep_parent: bool) -> Isometry:
    if keep_parent:
        parent = random_isometry(fine * fine, fine * fine, seed).data
        parent = parent.reshape(fine, fine, coarse, fine * fine // coarse)
        return Isometry(Tensor(parent[..., 0], W_AXES), Tensor(parent, W_PARENT_AXES))
    w = random_isometry(fine * fine, coarse, seed).data
    return Isometry(Tensor(w.reshape(fine, fine, coarse), W_AXES))


def _draw_top(chi: int, seed: int, keep_parent: bool) -> TopTensor:
    if keep_parent:
        parent = random_isometry(chi * chi, chi * chi, seed).data.reshape(chi, chi, chi, chi)
        return TopTensor(Tensor(parent[:, :, 0, 0], T_AXES), Tensor(parent, U_AXES))
    t = random_isometry(chi * chi, 1, seed).data
    return TopTensor(Tensor(t.reshape(chi, chi), T_AXES))


def build_random(
    n_sites: int,
    chi: int | list[int],
    seed: int,
    mode: MeraMode | str = MeraMode.GENERIC,
    site_dim: int | None = None,
    keep_parents: bool = False,
) -> Mera:
    """Random network whose every tensor satisfies its isometric constraint.

    Args:
        n_sites: lattice size N = 2^k, k >= 2
        chi: wire dimension for every layer, or one chi_out per layer (fine to coarse)
        seed: master seed; every tensor gets its own derived 64-bit seed
        mode: generic, translation_invariant (one (u, w) per layer) or scale_invariant
            (one (u, w) for the whole network)
        site_dim: physical dimension; defaults to the first layer's chi
        keep_parents: also store the parent unitaries of isometries and top tensor
    """
    try:
        mode = MeraMode(mode)
    except ValueError:
        raise ArgumentError(f"unknown mode {mode!r}; choose one of {[m.value for m in MeraMode]}") from None
    if int(seed) < 0:
        raise ArgumentError(f"seed must be non-negative, got {seed}")
    n_layers = layer_count(n_sites)
    site_dim, chis = _chi_chain(n_layers, chi, site_dim)
    dims_in = [site_dim] + chis[:-1]

    if mode is MeraMode.SCALE_INVARIANT and (len(set(chis)) != 1 or site_dim != chis[0]):
        raise ArgumentError("scale_invariant mode needs a uniform chi equal to site_dim")
    if keep_parents:
        for index, (fine, coarse) in enumerate(zip(dims_in, chis, strict=True)):
            if (fine * fine) % coarse:
                raise ArgumentError(
                    f"layer {index}: parents need χ_coarse={coarse} to divide χ_fine²={fine * fine}"
                )

    seeds = iter(int(s) for s in np.random.SeedSequence(int(seed)).generate_state(2 * n_sites, dtype=np.uint64))
    get_logger().debug(f"Building {mode} network: N={n_sites}, site_dim={site_dim}, chi={chis}, seed={seed}")

    layers: list[MeraLayer] = []
    n = n_sites
    shared_pair: tuple[Disentangler, Isometry] | None = None
    for fine, coarse in zip(dims_in, chis, strict=True):
        if mode is MeraMode.GENERIC:
            us = tuple(_draw_disentangler(fine, next(seeds)) for _ in range(n // 2))
            ws = tuple(_draw_isometry(fine, coarse, next(seeds), keep_parents) for _ in range(n // 2))
        else:
            if shared_pair is None or mode is MeraMode.TRANSLATION_INVARIANT:
                shared_pair = (
                    _draw_disentangler(fine, next(seeds)),
                    _draw_isometry(fine, coarse, next(seeds), keep_parents),
                )
            us, ws = (shared_pair[0],), (shared_pair[1],)
        layers.append(MeraLayer(n, fine, coarse, us, ws, shared=mode is not MeraMode.GENERIC))
        n //= 2

    top = _draw_top(chis[-1], next(seeds), keep_parents)
    return Mera(n_sites, site_dim, tuple(layers), top, mode)


def build_product(n_sites: int, site_dim: int = 2) -> Mera:
    """Network of identity-like gates producing the product state |0…0⟩.

    u = 1, w|k⟩ = |k⟩|0⟩ and t = |00⟩; every layer shares the same pair.
    """
    n_layers = layer_count(n_sites)
    d = site_dim
    eye = np.eye(d)
    u = Disentangler(Tensor(np.einsum("ac,bd->abcd", eye, eye), U_AXES))
    w_data = np.zeros((d, d, d))
    w_data[:, 0, :] = eye
    w = Isometry(Tensor(w_data, W_AXES))
    t_data = np.zeros((d, d))
    t_data[0, 0] = 1.0
    layers = tuple(MeraLayer(n_sites >> i, d, d, (u,), (w,), shared=True) for i in range(n_layers))
    return Mera(n_sites, d, layers, TopTensor(Tensor(t_data, T_AXES)), MeraMode.SCALE_INVARIANT)


def expand(m: Mera) -> Mera:
    """Materialize every slot as its own tensor (mode generic)."""

    def copy(t: Tensor | None) -> Tensor | None:
        return None if t is None else Tensor(t.data.copy(), t.axes)

    layers = []
    for layer in m.layers:
        half = layer.n_wires_out
        us = tuple(Disentangler(copy(layer.disentangler(j).tensor)) for j in range(half))
        ws = tuple(
            Isometry(copy(layer.isometry(k).tensor), copy(layer.isometry(k).parent)) for k in range(half)
        )
        layers.append(MeraLayer(layer.n_wires_in, layer.chi_in, layer.chi_out, us, ws, shared=False))
    top = TopTensor(copy(m.top.tensor), copy(m.top.parent))
    return Mera(m.n_sites, m.site_dim, tuple(layers), top, MeraMode.GENERIC)


@dataclass(frozen=True)
class SlotViolation:
    path: str
    kind: str
    constraint: str
    violation: float


@dataclass(frozen=True)
class ValidationReport:
    entries: tuple[SlotViolation, ...]
    tolerance: float

    @property
    def max_violation(self) -> float:
        return max((e.violation for e in self.entries), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance

    @property
    def failures(self) -> list[SlotViolation]:
        return [e for e in self.entries if e.violation > self.tolerance]

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "tolerance": self.tolerance,
            "max_violation": self.max_violation,
            "slots_checked": len(self.entries),
            "failures": [vars(e) for e in self.failures],
        }


def validate(m: Mera, tol: float = CONSTRAINT_TOL) -> ValidationReport:
    """Constraint violation of every tensor slot; never mutates the network.

    Shared tensors are evaluated once and reported for every slot that uses them.
    """
    cache: dict[tuple[int, str], float] = {}

    def measure(obj: object, what: str, fn) -> float:
        key = (id(obj), what)
        if key not in cache:
            cache[key] = float(fn())
        return cache[key]

    entries: list[SlotViolation] = []
    for index, layer in enumerate(m.layers):
        for j in range(layer.n_wires_out):
            u = layer.disentangler(j)
            entries.append(
                SlotViolation(f"layers[{index}].disentanglers[{j}]", "disentangler", "unitary",
                              measure(u, "u", u.violation))
            )
        for k in range(layer.n_wires_out):
            w = layer.isometry(k)
            path = f"layers[{index}].isometries[{k}]"
            entries.append(SlotViolation(path, "isometry", "isometric", measure(w, "w", w.violation)))
            if w.parent is not None:
                entries.append(
                    SlotViolation(f"{path}.parent", "isometry_parent", "unitary",
                                  measure(w, "parent", w.parent_violation))
                )
    entries.append(SlotViolation("top", "top", "normalized", m.top.violation()))
    if m.top.parent is not None:
        entries.append(SlotViolation("top.parent", "top_parent", "unitary", m.top.parent_violation()))
    return ValidationReport(tuple(entries), tol)


@dataclass(frozen=True)
class ParamCount:
    slots: int
    tensors: int
    distinct_tensors: int
    stored_scalars: int

    def to_dict(self) -> dict:
        return vars(self).copy()


def param_count(m: Mera) -> ParamCount:
    """Slot and storage accounting.

    ``tensors`` counts the network's tensor positions (2N − 3); ``slots`` counts circuit gates,
    where the top tensor stands for the three gates it absorbs (seed gate, isometry and
    disentangler on the two top wires), giving 2N − 1.
    """
    tensors = sum(layer.n_wires_in for layer in m.layers) + 1
    stored: dict[int, int] = {}
    distinct: set[int] = set()
    for layer in m.layers:
        for obj in (*layer.disentanglers, *layer.isometries):
            distinct.add(id(obj))
            stored[id(obj.tensor)] = obj.tensor.data.size
            parent = getattr(obj, "parent", None)
            if parent is not None:
                stored[id(parent)] = parent.data.size
    distinct.add(id(m.top))
    stored[id(m.top.tensor)] = m.top.tensor.data.size
    if m.top.parent is not None:
        stored[id(m.top.parent)] = m.top.parent.data.size
    return ParamCount(
        slots=tensors + 2,
        tensors=tensors,
        distinct_tensors=len(distinct),
        stored_scalars=sum(stored.values()),
    )


def input_slots(m: Mera) -> list[str]:
    """Labels of the N incoming circuit wires: isometries fine to coarse, then the top's two."""
    labels = [
        f"layers[{index}].isometries[{k}]"
        for index, layer in enumerate(m.layers)
        for k in range(layer.n_wires_out)
    ]
    return labels + ["top.in1", "top.in2"]
