"""Unit tests for causal cones and cone-based reduced density matrices."""

import numpy as np
import pytest

from mera_kit.cone import (
    ConeSlice,
    causal_past,
    cone_levels,
    cone_of,
    correlator,
    descend_step,
    expect_local,
    is_cyclic_contiguous,
    rdm,
    top_density,
)
from mera_kit.errors import ArgumentError, CostGuardError, StructureError
from mera_kit.mera import MeraMode, build_product, build_random, disentangler_of, disentangler_wires, expand
from mera_kit.operators import PAULI_X, PAULI_Z
from mera_kit.oracle import layer_matrix
from mera_kit.renorm import LocalOperator
from mera_kit.tensor_core import DensityMatrix, max_abs, partial_trace, permute_subsystems, random_density_matrix

pytestmark = pytest.mark.unit


def _preimage(coarse_wires: set[int], n_fine: int) -> set[int]:
    """Fine wires reached going down one layer from ``coarse_wires``."""
    mid = {w for c in coarse_wires for w in (2 * c, 2 * c + 1)}
    return {x for w in mid for x in disentangler_wires(disentangler_of(w, n_fine), n_fine)}


def _max_slice_width(n_sites: int, sites: list[int]) -> int:
    return max(s.width for s in cone_levels(n_sites, sites))


class TestCausalPast:
    """Test the one-layer causal past of a wire set."""

    def test_site_zero_uses_wrapping_gate(self):
        """Test that site 0 reaches the wrapping disentangler."""
        assert causal_past([0], 8) == ((0, 7), (0, 3))

    def test_odd_site(self):
        """Test the causal past of an odd site."""
        assert causal_past([3], 8) == ((3, 4), (1, 2))

    def test_adjacent_pair_on_one_gate(self):
        """Test a pair that shares one disentangler."""
        assert causal_past([1, 2], 8) == ((1, 2), (0, 1))

    def test_adjacent_pair_across_gates(self):
        """Test a pair that straddles two disentanglers."""
        assert causal_past([2, 3], 16) == ((1, 2, 3, 4), (0, 1, 2))

    def test_two_layer_preimage(self):
        """Test that two layers down from one wire reach ten wires."""
        one = _preimage({5}, 32)
        two = _preimage(one, 64)
        assert one == {9, 10, 11, 12}
        assert two == set(range(17, 27))
        assert len(two) == 10


class TestContiguity:
    """Test the cyclic contiguity helper."""

    @pytest.mark.parametrize("sites", [[0], [2, 3, 4], [7, 0, 1], [6, 7, 0, 1], list(range(8))])
    def test_contiguous(self, sites):
        """Test cyclically contiguous site sets."""
        assert is_cyclic_contiguous(sites, 8)

    @pytest.mark.parametrize("sites", [[], [0, 2], [0, 1, 3], [1, 2, 5, 6]])
    def test_not_contiguous(self, sites):
        """Test sets with gaps."""
        assert not is_cyclic_contiguous(sites, 8)


class TestConeLevels:
    """Test the combinatorial cone from a site set up to the top."""

    def test_levels_run_to_the_top(self):
        """Test that the cone ends on at most two top wires."""
        slices = cone_levels(16, [5])
        assert [s.level for s in slices] == [0, 1, 2, 3]
        assert slices[0].wires == (5,)
        assert slices[-1].mid_wires == ()
        assert len(slices[-1].wires) <= 2

    def test_cone_from_coarse_level(self):
        """Test a cone that starts above the physical level."""
        slices = cone_levels(32, [3], level=2)
        assert slices[0].level == 2
        assert len(slices) == 3

    def test_rejects_sites_outside_level(self):
        """Test the site and level range checks."""
        with pytest.raises(ArgumentError):
            cone_levels(16, [4], level=2)
        with pytest.raises(ArgumentError):
            cone_levels(16, [])
        with pytest.raises(ArgumentError):
            cone_levels(16, [0], level=4)

    @pytest.mark.parametrize("exponent", range(2, 11))
    def test_width_bound(self, exponent):
        """Test that single sites and neighbour pairs never need more than four wires."""
        n = 2**exponent
        for s in range(n):
            assert _max_slice_width(n, [s]) <= 4
            assert _max_slice_width(n, [s, (s + 1) % n]) <= 4

    @pytest.mark.slow
    @pytest.mark.parametrize("exponent", range(11, 15))
    def test_width_bound_large_lattices(self, exponent):
        """Test the width bound on lattices up to 2^14 sites."""
        n = 2**exponent
        for s in range(n):
            assert _max_slice_width(n, [s]) <= 4
            assert _max_slice_width(n, [s, (s + 1) % n]) <= 4

    def test_far_pair_is_union_of_single_cones(self):
        """Test that distant sites have the union of their cones."""
        pair = cone_levels(16, [0, 8])
        left = cone_levels(16, [0])
        right = cone_levels(16, [8])
        for p, a, b in zip(pair, left, right, strict=True):
            assert set(p.wires) == set(a.wires) | set(b.wires)
            assert set(p.mid_wires) == set(a.mid_wires) | set(b.mid_wires)

    def test_cone_of_matches_cone_levels(self, generic_mera):
        """Test the network-level wrapper."""
        assert cone_of(generic_mera, [2, 3]) == cone_levels(8, [2, 3])


class TestRdm:
    """Test reduced density matrices from the causal cone."""

    def test_product_network_gives_zero_state(self):
        """Test that the product network gives |0⟩⟨0| everywhere."""
        m = build_product(16)
        zero = np.diag([1.0, 0.0])
        for s in (0, 5, 15):
            assert max_abs(rdm(m, [s]).matrix - zero) <= 1e-14
        assert max_abs(rdm(m, [3, 4]).matrix - np.kron(zero, zero)) <= 1e-14

    def test_every_single_site_is_a_state(self, generic_mera):
        """Test unit trace for every one-site RDM."""
        for s in range(8):
            rho = rdm(generic_mera, [s])
            assert rho.dims == (2,)
            assert abs(np.trace(rho.matrix) - 1.0) <= 1e-12

    def test_pair_marginal_matches_single_site(self, generic_mera):
        """Test that pair RDMs marginalize to one-site RDMs."""
        for s in range(8):
            pair = rdm(generic_mera, [s, (s + 1) % 8])
            assert max_abs(partial_trace(pair, [0]).matrix - rdm(generic_mera, [s]).matrix) <= 1e-12

    def test_requested_order_is_kept(self, generic_mera):
        """Test that subsystems follow the requested site order."""
        forward = rdm(generic_mera, [2, 3])
        backward = rdm(generic_mera, [3, 2])
        assert max_abs(permute_subsystems(forward, [1, 0]).matrix - backward.matrix) <= 1e-12

    def test_block_of_three_and_four(self, generic_mera):
        """Test three- and four-site blocks."""
        three = rdm(generic_mera, [7, 0, 1])
        assert three.dims == (2, 2, 2)
        four = rdm(generic_mera, [2, 3, 4, 5])
        assert max_abs(partial_trace(four, [1, 2]).matrix - rdm(generic_mera, [3, 4]).matrix) <= 1e-12

    def test_coarse_level(self, generic_mera):
        """Test an RDM on a coarse lattice."""
        rho = rdm(generic_mera, [1, 2], level=1)
        assert rho.dims == (2, 2)

    def test_top_level_is_top_density(self, generic_mera):
        """Test that the top level returns t t†."""
        assert max_abs(rdm(generic_mera, [0, 1], level=2).matrix - top_density(generic_mera).matrix) <= 1e-14

    def test_duplicates_rejected(self, generic_mera):
        """Test that repeated sites are rejected."""
        with pytest.raises(ArgumentError):
            rdm(generic_mera, [1, 1])

    def test_non_contiguous_block_rejected(self, generic_mera):
        """Test that scattered blocks need override."""
        with pytest.raises(ArgumentError):
            rdm(generic_mera, [0, 2, 4])

    def test_site_count_guard(self, generic_mera):
        """Test the site-count guard."""
        with pytest.raises(CostGuardError):
            rdm(generic_mera, [0, 1, 2, 3, 4])

    def test_override_lifts_guards(self, generic_mera):
        """Test that override accepts large and scattered sets."""
        rho = rdm(generic_mera, [0, 1, 2, 3, 4], override=True)
        assert rho.dims == (2,) * 5
        assert rdm(generic_mera, [0, 2, 5], override=True).dims == (2, 2, 2)

    def test_cone_width_guard(self, generic_mera):
        """Test the cone-width guard."""
        with pytest.raises(CostGuardError):
            rdm(generic_mera, [0, 1], max_wires=3)

    @pytest.mark.parametrize("mode", [MeraMode.TRANSLATION_INVARIANT, MeraMode.SCALE_INVARIANT])
    @pytest.mark.parametrize("sites", [[0], [5], [3, 4], [0, 8]])
    def test_shared_network_matches_expanded_copy(self, mode, sites):
        """Test that sharing tensors gives the same RDMs as one tensor per slot."""
        m = build_random(16, 2, seed=21, mode=mode)
        assert max_abs(rdm(m, sites).matrix - rdm(expand(m), sites).matrix) <= 1e-12

    def test_shared_network_rdm_depends_on_site(self):
        """Test that shared tensors do not make one-site RDMs equal across sites."""
        m = build_random(16, 2, seed=21, mode=MeraMode.TRANSLATION_INVARIANT)
        first = rdm(m, [0]).matrix
        assert max(max_abs(rdm(m, [s]).matrix - first) for s in range(1, 16)) > 1e-6


class TestDescendStep:
    """Test single descent steps."""

    def test_level_zero_slice_cannot_descend(self, generic_mera):
        """Test that a physical-level slice cannot descend."""
        rho = rdm(generic_mera, [0])
        with pytest.raises(StructureError):
            descend_step(ConeSlice(0, (0,), rho), generic_mera.layers[0], [0])

    def test_missing_coarse_wires(self, generic_mera):
        """Test that needed coarse wires must be in the slice."""
        upper = ConeSlice(1, (0,), rdm(generic_mera, [0], level=1))
        with pytest.raises(StructureError):
            descend_step(upper, generic_mera.layers[0], [4])

    def test_unsorted_slice_rejected(self, generic_mera):
        """Test that slice wires must be sorted."""
        with pytest.raises(StructureError):
            ConeSlice(1, (1, 0), rdm(generic_mera, [0, 1], level=1))

    @pytest.mark.parametrize("targets", [[3], [2, 3], [0, 7], [4, 5, 6]])
    @pytest.mark.parametrize("seed", range(3))
    def test_matches_dense_layer(self, generic_mera, targets, seed):
        """Test one descent against the dense layer map L σ L† traced down to the targets."""
        layer = generic_mera.layers[0]
        upper = random_density_matrix((2,) * 4, seed=seed)
        dense = layer_matrix(layer)
        fine = dense @ upper.matrix @ dense.conj().T
        expected = partial_trace(DensityMatrix((2,) * 8, 0.5 * (fine + fine.conj().T)), targets)

        step = descend_step(ConeSlice(1, (0, 1, 2, 3), upper), layer, targets)
        assert step.layer_index == 0
        assert step.wires == tuple(targets)
        assert max_abs(step.sigma.matrix - expected.matrix) <= 1e-12


class TestExpectations:
    """Test local expectation values and two-point correlators."""

    def test_hermitian_expectation_is_real(self, generic_mera):
        """Test that Hermitian expectations come back real."""
        result = expect_local(generic_mera, LocalOperator(0, (3,), PAULI_Z))
        assert result.hermitian
        assert result.value.imag == 0.0
        assert -1.0 <= result.real <= 1.0

    def test_non_hermitian_keeps_imaginary_part(self, generic_mera):
        """Test that non-Hermitian operators keep their imaginary part."""
        raising = np.array([[0, 1], [0, 0]], dtype=complex)
        result = expect_local(generic_mera, LocalOperator(0, (3,), raising))
        assert not result.hermitian
        assert result.imag_residual == abs(result.value.imag)

    def test_product_network_correlators(self):
        """Test correlators of the product state."""
        m = build_product(8)
        assert abs(correlator(m, PAULI_Z, PAULI_Z, 0, 5) - 1.0) <= 1e-14
        assert abs(correlator(m, PAULI_X, PAULI_Z, 2, 3)) <= 1e-14

    def test_correlator_matches_pair_rdm(self, generic_mera):
        """Test correlators against the two-site RDM."""
        value = correlator(generic_mera, PAULI_X, PAULI_Z, 1, 6)
        expected = rdm(generic_mera, [1, 6]).expectation(np.kron(PAULI_X, PAULI_Z))
        assert abs(value - expected) <= 1e-14

    def test_same_site_rejected(self, generic_mera):
        """Test that both operators need distinct sites."""
        with pytest.raises(ArgumentError):
            correlator(generic_mera, PAULI_Z, PAULI_Z, 2, 2)

    def test_wrong_operator_shape(self, generic_mera):
        """Test the one-site operator shape check."""
        with pytest.raises(ArgumentError):
            correlator(generic_mera, np.eye(3), PAULI_Z, 0, 1)
