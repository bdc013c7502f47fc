"""Dense complex tensor algebra.

Tensors are row-major ``complex128`` arrays with one name per axis. Every function here is pure:
inputs are never modified and outputs never alias writable inputs.
"""

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import ArgumentError, ShapeError, ValidationError

TOL_HERM = 1e-10
TOL_PSD = 1e-10
TOL_TRACE = 1e-10

AxisRef = int | str


def max_abs(x: np.ndarray | complex | float) -> float:
    """Largest entrywise magnitude (0.0 for empty input)."""
    arr = np.asarray(x)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def hermitian_violation(matrix: np.ndarray) -> float:
    """Max-abs distance between a square matrix and its conjugate transpose."""
    return max_abs(matrix - matrix.conj().T)


@dataclass(frozen=True, eq=False)
class Tensor:
    """Dense complex multi-index array with named axes.

    Axis order is part of the value. ``==`` is exact equality of axis names, shape and entries;
    use :meth:`allclose` for comparisons within a tolerance.
    """

    data: np.ndarray
    axes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.complex128)
        axes = tuple(self.axes) if self.axes else tuple(f"a{i}" for i in range(data.ndim))
        if len(axes) != data.ndim:
            raise ShapeError(f"{len(axes)} axis names given for a rank-{data.ndim} tensor")
        if any(d < 1 for d in data.shape):
            raise ShapeError(f"axis dimensions must be positive, got {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "axes", axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def rank(self) -> int:
        return self.data.ndim

    def axis(self, ref: AxisRef) -> int:
        """Resolve an axis name or position to a position."""
        if isinstance(ref, str):
            hits = [i for i, name in enumerate(self.axes) if name == ref]
            if len(hits) != 1:
                raise ArgumentError(
                    f"axis name {ref!r} matches {len(hits)} axes of {self.axes}"
                )
            return hits[0]
        index = int(ref)
        if not 0 <= index < self.rank:
            raise ArgumentError(f"axis {index} out of range for rank {self.rank}")
        return index

    def conj(self) -> "Tensor":
        return Tensor(self.data.conj(), self.axes)

    def allclose(self, other: "Tensor", tol: float = 1e-12) -> bool:
        return (
            self.axes == other.axes
            and self.shape == other.shape
            and max_abs(self.data - other.data) <= tol
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        return (
            self.axes == other.axes
            and self.shape == other.shape
            and bool(np.array_equal(self.data, other.data))
        )

    __hash__ = None  # type: ignore[assignment]


def _resolve(a: Tensor, refs: Iterable[AxisRef], what: str) -> list[int]:
    positions = [a.axis(r) for r in refs]
    if len(set(positions)) != len(positions):
        raise ArgumentError(f"an axis of the {what} tensor appears twice in {list(refs)}")
    return positions


def contract(a: Tensor, b: Tensor, pairs: Sequence[tuple[AxisRef, AxisRef]]) -> Tensor:
    """Sum over paired axes of ``a`` and ``b``.

    The result carries the unpaired axes of ``a`` followed by the unpaired axes of ``b``, each
    in their original relative order.
    """
    left = _resolve(a, [p[0] for p in pairs], "first")
    right = _resolve(b, [p[1] for p in pairs], "second")
    for i, j in zip(left, right, strict=True):
        if a.shape[i] != b.shape[j]:
            raise ShapeError(
                f"cannot contract axis {a.axes[i]!r} (dim {a.shape[i]}) "
                f"with axis {b.axes[j]!r} (dim {b.shape[j]})"
            )
    data = np.tensordot(a.data, b.data, axes=(left, right))
    names = [n for i, n in enumerate(a.axes) if i not in left]
    names += [n for j, n in enumerate(b.axes) if j not in right]
    return Tensor(data, tuple(names))


def permute_axes(a: Tensor, order: Sequence[AxisRef]) -> Tensor:
    """Reorder the axes of ``a``; ``order[i]`` is the old axis placed at position i."""
    positions = [a.axis(r) for r in order]
    if sorted(positions) != list(range(a.rank)):
        raise ArgumentError(f"{list(order)} is not a permutation of the {a.rank} axes")
    return Tensor(np.transpose(a.data, positions), tuple(a.axes[p] for p in positions))


def inverse_permutation(order: Sequence[int]) -> list[int]:
    return [int(i) for i in np.argsort(order)]


def group_axes(a: Tensor, groups: Sequence[Sequence[AxisRef]]) -> Tensor:
    """Fuse each group of axes into one axis.

    The axes are first permuted into the concatenated group order, then each group becomes one
    axis whose dimension is the product of its members. Contiguous in-order groups leave the
    flat data untouched.
    """
    if any(len(g) == 0 for g in groups):
        raise ArgumentError("empty axis group")
    flat = [a.axis(r) for g in groups for r in g]
    if sorted(flat) != list(range(a.rank)):
        raise ArgumentError(f"groups {list(map(list, groups))} do not partition the {a.rank} axes")
    data = np.transpose(a.data, flat)
    shape: list[int] = []
    names: list[str] = []
    cursor = 0
    for g in groups:
        members = flat[cursor : cursor + len(g)]
        cursor += len(g)
        shape.append(math.prod(a.shape[m] for m in members))
        names.append("*".join(a.axes[m] for m in members))
    return Tensor(data.reshape(shape), tuple(names))


def ungroup_axes(
    a: Tensor, axis: AxisRef, shape: Sequence[int], names: Sequence[str] | None = None
) -> Tensor:
    """Split one axis back into ``shape`` (inverse of a contiguous grouping)."""
    pos = a.axis(axis)
    if math.prod(shape) != a.shape[pos]:
        raise ShapeError(f"cannot split axis {a.axes[pos]!r} of dim {a.shape[pos]} into {tuple(shape)}")
    if names is None:
        parts = a.axes[pos].split("*")
        names = parts if len(parts) == len(shape) else [f"{a.axes[pos]}.{i}" for i in range(len(shape))]
    new_shape = a.shape[:pos] + tuple(shape) + a.shape[pos + 1 :]
    new_axes = a.axes[:pos] + tuple(names) + a.axes[pos + 1 :]
    return Tensor(a.data.reshape(new_shape), new_axes)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix on a product of subsystems.

    Subsystem 0 is the slowest-varying index of the matrix rows and columns. Construction checks
    every invariant and raises ValidationError; nothing is silently renormalized.
    """

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims):
            raise ShapeError(f"subsystem dimensions must be positive, got {dims}")
        matrix = np.array(self.matrix, dtype=np.complex128)
        side = math.prod(dims)
        if matrix.shape != (side, side):
            raise ShapeError(f"matrix of shape {matrix.shape} does not match dims {dims}")

        herm = hermitian_violation(matrix)
        if herm > TOL_HERM:
            raise ValidationError(f"density matrix is not Hermitian (violation {herm:.3e})")
        trace = complex(np.trace(matrix))
        if abs(trace - 1.0) > TOL_TRACE:
            raise ValidationError(f"density matrix trace is {trace:.12g}, expected 1")
        lowest = float(linalg.eigvalsh(matrix, check_finite=True)[0])
        if lowest < -TOL_PSD:
            raise ValidationError(f"density matrix has negative eigenvalue {lowest:.3e}")

        matrix.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", matrix)

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def as_tensor(self) -> np.ndarray:
        """Ket axes for every subsystem followed by the matching bra axes."""
        return self.matrix.reshape(self.dims + self.dims)

    def expectation(self, op: np.ndarray) -> complex:
        """tr(rho · op)."""
        op = np.asarray(op)
        if op.shape != self.matrix.shape:
            raise ShapeError(f"operator of shape {op.shape} does not act on dims {self.dims}")
        return complex(np.einsum("ij,ji->", self.matrix, op))


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every subsystem not in ``keep``; kept subsystems stay in original order."""
    k = rho.n_subsystems
    kept = sorted(set(int(i) for i in keep))
    if any(not 0 <= i < k for i in kept):
        raise ArgumentError(f"keep {kept} is not a subset of subsystems 0..{k - 1}")
    if len(kept) == k:
        return rho
    ket = list(range(k))
    bra = [i + k if i in kept else i for i in range(k)]
    out = kept + [i + k for i in kept]
    reduced = np.einsum(rho.as_tensor(), ket + bra, out)
    dims = tuple(rho.dims[i] for i in kept)
    side = math.prod(dims)
    return DensityMatrix(dims, reduced.reshape(side, side))


def permute_subsystems(rho: DensityMatrix, order: Sequence[int]) -> DensityMatrix:
    """Reorder subsystems; ``order[i]`` is the old subsystem placed at position i."""
    k = rho.n_subsystems
    order = [int(i) for i in order]
    if sorted(order) != list(range(k)):
        raise ArgumentError(f"{order} is not a permutation of {k} subsystems")
    if order == list(range(k)):
        return rho
    data = np.transpose(rho.as_tensor(), order + [i + k for i in order])
    dims = tuple(rho.dims[i] for i in order)
    side = math.prod(dims)
    return DensityMatrix(dims, data.reshape(side, side))


def random_isometry(rows: int, cols: int, seed: int) -> Tensor:
    """Column-orthonormal ``rows × cols`` matrix from a seeded complex Gaussian.

    The Gaussian matrix is orthonormalized by QR and the first nonzero entry of every column is
    made real positive. ``rows == cols`` yields a unitary.
    """
    if cols < 1 or rows < cols:
        raise ArgumentError(f"random_isometry needs rows >= cols >= 1, got {rows}x{cols}")
    if not 0 <= int(seed) < 2**64:
        raise ArgumentError(f"seed must be an unsigned 64-bit value, got {seed}")
    rng = np.random.default_rng(int(seed))
    gauss = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    q, _ = linalg.qr(gauss, mode="economic")
    first = np.argmax(np.abs(q) > 1e-14, axis=0)
    pivots = q[first, np.arange(cols)]
    q = q * (np.abs(pivots) / pivots)[np.newaxis, :]
    return Tensor(q, ("rows", "cols"))


def random_density_matrix(dims: Sequence[int], seed: int) -> DensityMatrix:
    """Full-rank random density matrix G G† / tr(G G†)."""
    side = math.prod(dims)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((side, side)) + 1j * rng.standard_normal((side, side))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(tuple(dims), rho / np.trace(rho).real)


def entropy_of_spectrum(probabilities: np.ndarray) -> float:
    """Shannon entropy in bits with 0·log₂0 := 0; entries are clamped to [0, 1]."""
    lam = np.clip(np.real(np.asarray(probabilities)), 0.0, 1.0)
    lam = lam[lam > 0.0]
    return float(-np.sum(lam * np.log2(lam)))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = −tr(rho log₂ rho) in bits."""
    matrix = rho.matrix
    herm = hermitian_violation(matrix)
    if herm > TOL_HERM:
        raise ValidationError(f"entropy of a non-Hermitian matrix (violation {herm:.3e})")
    eigenvalues = linalg.eigvalsh(matrix)
    if eigenvalues[0] < -TOL_PSD:
        raise ValidationError(f"entropy of a matrix with eigenvalue {eigenvalues[0]:.3e}")
    return entropy_of_spectrum(eigenvalues)
