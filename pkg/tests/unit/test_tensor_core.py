"""Unit tests for the dense tensor algebra."""

import math

import numpy as np
import pytest

from mera_kit.errors import ArgumentError, ShapeError, ValidationError
from mera_kit.tensor_core import (
    DensityMatrix,
    Tensor,
    contract,
    entropy_of_spectrum,
    group_axes,
    inverse_permutation,
    max_abs,
    partial_trace,
    permute_axes,
    permute_subsystems,
    random_density_matrix,
    random_isometry,
    ungroup_axes,
    von_neumann_entropy,
)
from tests.common_test_utils import random_matrix

pytestmark = pytest.mark.unit


def _random_tensor(shape: tuple[int, ...], seed: int, axes: tuple[str, ...]) -> Tensor:
    rng = np.random.default_rng(seed)
    return Tensor(rng.standard_normal(shape) + 1j * rng.standard_normal(shape), axes)


class TestTensor:
    """Test the named-axis tensor value type."""

    def test_default_axis_names(self):
        """Test that unnamed axes get positional names."""
        t = Tensor(np.zeros((2, 3)))
        assert t.axes == ("a0", "a1")
        assert t.shape == (2, 3)
        assert t.rank == 2

    def test_data_is_copied_and_read_only(self):
        """Test that a tensor owns a frozen copy of its data."""
        raw = np.ones((2, 2))
        t = Tensor(raw, ("i", "j"))
        raw[0, 0] = 5.0
        assert t.data[0, 0] == 1.0
        with pytest.raises(ValueError):
            t.data[0, 0] = 2.0

    def test_axis_resolution(self):
        """Test lookup of axes by name and by position."""
        t = Tensor(np.zeros((2, 3, 4)), ("x", "y", "z"))
        assert t.axis("z") == 2
        assert t.axis(1) == 1
        with pytest.raises(ArgumentError):
            t.axis("missing")
        with pytest.raises(ArgumentError):
            t.axis(3)

    def test_wrong_number_of_names(self):
        """Test that axis names must match the rank."""
        with pytest.raises(ShapeError):
            Tensor(np.zeros((2, 2)), ("only",))

    def test_equality_is_exact(self):
        """Test bitwise equality against tolerant comparison."""
        a = Tensor(np.eye(2), ("i", "j"))
        b = Tensor(np.eye(2) + 1e-15, ("i", "j"))
        assert a == Tensor(np.eye(2), ("i", "j"))
        assert a != b
        assert a.allclose(b, tol=1e-12)
        assert a != Tensor(np.eye(2), ("j", "i"))


class TestContract:
    """Test pairwise contraction."""

    def test_matrix_product(self):
        """Test that one shared axis gives the matrix product."""
        a = random_matrix(3, 1)
        b = random_matrix(3, 2)
        out = contract(Tensor(a, ("i", "k")), Tensor(b, ("k", "j")), [("k", "k")])
        assert out.axes == ("i", "j")
        assert max_abs(out.data - a @ b) <= 1e-12

    def test_identity_contraction_leaves_tensor_unchanged(self):
        """Test contraction with an identity matrix."""
        rng = np.random.default_rng(0)
        data = rng.standard_normal((2, 3, 4))
        t = Tensor(data, ("a", "b", "c"))
        out = contract(t, Tensor(np.eye(3), ("x", "y")), [("b", "x")])
        assert out.axes == ("a", "c", "y")
        assert np.array_equal(permute_axes(out, ["a", "y", "c"]).data, t.data)

    def test_dimension_mismatch_names_both_axes(self):
        """Test that a mismatch error names the offending axes."""
        with pytest.raises(ShapeError, match="'k'.*'m'"):
            contract(Tensor(np.zeros((2, 3)), ("i", "k")), Tensor(np.zeros((4, 2)), ("m", "j")), [("k", "m")])

    def test_duplicate_axis_rejected(self):
        """Test that an axis cannot be paired twice."""
        a = Tensor(np.zeros((2, 2)), ("i", "j"))
        b = Tensor(np.zeros((2, 2)), ("k", "l"))
        with pytest.raises(ArgumentError):
            contract(a, b, [("i", "k"), ("i", "l")])

    def test_contraction_associativity(self):
        """Test (ab)c = a(bc) for a chain of three tensors."""
        rng = np.random.default_rng(4)
        a = Tensor(rng.standard_normal((2, 3)), ("i", "j"))
        b = Tensor(rng.standard_normal((3, 4)), ("j", "k"))
        c = Tensor(rng.standard_normal((4, 5)), ("k", "l"))
        left = contract(contract(a, b, [("j", "j")]), c, [("k", "k")])
        right = contract(a, contract(b, c, [("k", "k")]), [("j", "j")])
        assert left.allclose(right, tol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_contraction_is_bilinear(self, seed):
        """Test contract(αa₁ + βa₂, b) = α·contract(a₁, b) + β·contract(a₂, b)."""
        axes = ("i", "k", "l")
        a1 = _random_tensor((2, 3, 4), 3 * seed, axes)
        a2 = _random_tensor((2, 3, 4), 3 * seed + 1, axes)
        b = _random_tensor((4, 3, 5), 3 * seed + 2, ("l", "k", "j"))
        alpha, beta = 0.7 - 1.3j, -2.1 + 0.4j
        pairs = [("k", "k"), ("l", "l")]

        mixed = contract(Tensor(alpha * a1.data + beta * a2.data, axes), b, pairs)
        separate = alpha * contract(a1, b, pairs).data + beta * contract(a2, b, pairs).data
        assert max_abs(mixed.data - separate) <= 1e-12


class TestAxisReshaping:
    """Test permutation, grouping and splitting of axes."""

    def test_permute_rejects_non_permutation(self):
        """Test that repeated axes are not a permutation."""
        t = Tensor(np.zeros((2, 2, 2)))
        with pytest.raises(ArgumentError):
            permute_axes(t, [0, 0, 1])

    @pytest.mark.parametrize("seed", range(10))
    def test_inverse_permutation_restores(self, seed):
        """Test that a random rank-4 permutation followed by its inverse is exact."""
        rng = np.random.default_rng(seed)
        t = _random_tensor((2, 3, 4, 5), seed, ("a", "b", "c", "d"))
        order = [int(i) for i in rng.permutation(4)]
        shuffled = permute_axes(t, order)
        assert shuffled.shape == tuple(t.shape[i] for i in order)
        assert permute_axes(shuffled, inverse_permutation(order)) == t

    def test_contiguous_group_keeps_flat_data(self):
        """Test that grouping neighbouring axes is a pure reshape."""
        rng = np.random.default_rng(1)
        t = Tensor(rng.standard_normal((2, 3, 4)), ("a", "b", "c"))
        grouped = group_axes(t, [["a", "b"], ["c"]])
        assert grouped.shape == (6, 4)
        assert grouped.axes == ("a*b", "c")
        assert np.array_equal(grouped.data.reshape(-1), t.data.reshape(-1))

    def test_group_then_ungroup_restores(self):
        """Test that splitting a grouped axis gives the original tensor back."""
        rng = np.random.default_rng(2)
        t = Tensor(rng.standard_normal((2, 3, 4)), ("a", "b", "c"))
        back = ungroup_axes(group_axes(t, [["a"], ["b", "c"]]), 1, (3, 4))
        assert back == t

    def test_groups_must_partition(self):
        """Test that every axis must belong to exactly one group."""
        with pytest.raises(ArgumentError):
            group_axes(Tensor(np.zeros((2, 2, 2))), [[0], [1]])

    def test_ungroup_wrong_size(self):
        """Test that the split shape must multiply to the axis size."""
        with pytest.raises(ShapeError):
            ungroup_axes(Tensor(np.zeros((6,))), 0, (4, 2))


class TestDensityMatrix:
    """Test density matrix invariants and partial traces."""

    def test_rejects_non_hermitian(self):
        """Test the Hermiticity check."""
        with pytest.raises(ValidationError):
            DensityMatrix((2,), np.array([[0.5, 0.1], [0.0, 0.5]]))

    def test_rejects_wrong_trace(self):
        """Test the unit-trace check."""
        with pytest.raises(ValidationError):
            DensityMatrix((2,), np.eye(2))

    def test_rejects_negative_eigenvalue(self):
        """Test the positivity check."""
        with pytest.raises(ValidationError):
            DensityMatrix((2,), np.diag([1.5, -0.5]))

    def test_rejects_shape_mismatch(self):
        """Test that dims must match the matrix side."""
        with pytest.raises(ShapeError):
            DensityMatrix((2, 2), np.eye(2) / 2)

    def test_partial_trace_of_product_state(self):
        """Test that tracing a product state returns its factors."""
        rho_a = random_density_matrix((2,), seed=1)
        rho_b = random_density_matrix((3,), seed=2)
        joint = DensityMatrix((2, 3), np.kron(rho_a.matrix, rho_b.matrix))
        assert max_abs(partial_trace(joint, [0]).matrix - rho_a.matrix) <= 1e-12
        assert max_abs(partial_trace(joint, [1]).matrix - rho_b.matrix) <= 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_partial_trace_matches_elementwise_sum(self, seed):
        """Test σ_ij = Σ_k ⟨ik|ρ|jk⟩ on a random two-qubit state, for either kept qubit."""
        rho = random_density_matrix((2, 2), seed=seed)
        block = rho.matrix.reshape(2, 2, 2, 2)
        keep_first = np.array([[sum(block[i, k, j, k] for k in range(2)) for j in range(2)] for i in range(2)])
        keep_second = np.array([[sum(block[k, i, k, j] for k in range(2)) for j in range(2)] for i in range(2)])

        assert max_abs(partial_trace(rho, [0]).matrix - keep_first) <= 1e-12
        assert max_abs(partial_trace(rho, [1]).matrix - keep_second) <= 1e-12

    @pytest.mark.parametrize("keep", [[0], [1], [2], [0, 2]])
    def test_partial_trace_stays_positive(self, keep):
        """Test that the reduced state of a random qubit-qutrit-qubit state is PSD with unit trace."""
        reduced = partial_trace(random_density_matrix((2, 3, 2), seed=11), keep)
        assert np.linalg.eigvalsh(reduced.matrix).min() >= -1e-12
        assert abs(np.trace(reduced.matrix) - 1.0) <= 1e-12

    def test_partial_trace_keep_all_and_none(self):
        """Test the two trivial keep sets."""
        rho = random_density_matrix((2, 2), seed=3)
        assert partial_trace(rho, [0, 1]) is rho
        empty = partial_trace(rho, [])
        assert empty.matrix.shape == (1, 1)
        assert abs(empty.matrix[0, 0] - 1.0) <= 1e-12

    def test_partial_trace_bad_keep(self):
        """Test that kept subsystems must exist."""
        with pytest.raises(ArgumentError):
            partial_trace(random_density_matrix((2, 2), seed=0), [2])

    def test_permute_subsystems_swaps_kron_factors(self):
        """Test that swapping subsystems swaps Kronecker factors."""
        rho_a = random_density_matrix((2,), seed=4)
        rho_b = random_density_matrix((3,), seed=5)
        joint = DensityMatrix((2, 3), np.kron(rho_a.matrix, rho_b.matrix))
        swapped = permute_subsystems(joint, [1, 0])
        assert swapped.dims == (3, 2)
        assert max_abs(swapped.matrix - np.kron(rho_b.matrix, rho_a.matrix)) <= 1e-12

    def test_expectation_shape_check(self):
        """Test tr(ρ·1) = 1 and the operator shape check."""
        rho = random_density_matrix((2,), seed=6)
        assert abs(rho.expectation(np.eye(2)) - 1.0) <= 1e-12
        with pytest.raises(ShapeError):
            rho.expectation(np.eye(3))


class TestRandomIsometry:
    """Test seeded QR isometries."""

    @pytest.mark.parametrize("rows,cols", [(4, 2), (4, 4), (9, 3), (16, 16)])
    def test_columns_are_orthonormal(self, rows, cols):
        """Test Q†Q = 1."""
        q = random_isometry(rows, cols, seed=42).data
        assert max_abs(q.conj().T @ q - np.eye(cols)) <= 1e-12

    def test_deterministic_for_seed(self):
        """Test that equal seeds give equal isometries."""
        assert random_isometry(4, 2, seed=9) == random_isometry(4, 2, seed=9)
        assert random_isometry(4, 2, seed=9) != random_isometry(4, 2, seed=10)

    def test_phase_convention(self):
        """Test that the first non-zero entry of every column is real and positive."""
        q = random_isometry(6, 3, seed=7).data
        for col in range(3):
            first = q[np.argmax(np.abs(q[:, col]) > 1e-14), col]
            assert abs(first.imag) <= 1e-14
            assert first.real > 0

    def test_single_entry(self):
        """Test the 1×1 case."""
        q = random_isometry(1, 1, seed=0).data
        assert abs(q[0, 0] - 1.0) <= 1e-14

    def test_rejects_wide_shape(self):
        """Test that more columns than rows is rejected."""
        with pytest.raises(ArgumentError):
            random_isometry(2, 4, seed=0)


class TestEntropy:
    """Test von Neumann entropy in bits."""

    def test_pure_state_has_zero_entropy(self):
        """Test S = 0 for a pure state."""
        psi = np.array([1.0, 1.0j]) / math.sqrt(2)
        rho = DensityMatrix((2,), np.outer(psi, psi.conj()))
        assert abs(von_neumann_entropy(rho)) <= 1e-12

    def test_maximally_mixed(self):
        """Test S = log₂ d for the maximally mixed state."""
        for d in (2, 3, 4):
            rho = DensityMatrix((d,), np.eye(d) / d)
            assert abs(von_neumann_entropy(rho) - math.log2(d)) <= 1e-12

    def test_spectrum_with_zeros(self):
        """Test that zero eigenvalues contribute nothing."""
        assert entropy_of_spectrum(np.array([0.5, 0.5, 0.0])) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_unitary_conjugation_keeps_entropy(self, seed):
        """Test S(UρU†) = S(ρ) for a random unitary."""
        rho = random_density_matrix((2, 2), seed=seed)
        u = random_isometry(4, 4, seed=100 + seed).data
        rotated = u @ rho.matrix @ u.conj().T
        rotated = DensityMatrix((2, 2), 0.5 * (rotated + rotated.conj().T))
        assert abs(von_neumann_entropy(rotated) - von_neumann_entropy(rho)) <= 1e-10
