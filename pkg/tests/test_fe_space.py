"""
Unit tests for the P1 finite element algebra.
"""
import math

import numpy as np
import pytest

from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from aggrefem.exceptions import BoundsOverflowError
from aggrefem.exceptions import FieldError
from aggrefem.fe_space import NodalField
from aggrefem.fe_space import TruncationBounds
from aggrefem.fe_space import assemble_convection
from aggrefem.fe_space import assemble_secant_diffusion
from aggrefem.fe_space import compute_B_Linf
from aggrefem.fe_space import consistent_l2
from aggrefem.fe_space import dirichlet_energy
from aggrefem.fe_space import element_gradients
from aggrefem.fe_space import lumped_mass
from aggrefem.fe_space import monotone_gradient_gap
from aggrefem.fe_space import nodal_map
from aggrefem.fe_space import norms
from aggrefem.fe_space import stiffness
from aggrefem.fe_space import truncate
from aggrefem.interaction import GaussianKernel
from aggrefem.laws import DiffusionLaw
from aggrefem.laws import PowerLaw
from aggrefem.mesh import build_structured_acute_mesh

values_12 = hnp.arrays(np.float64, 12, elements=st.floats(-10.0, 10.0, allow_nan=False))


class TestNodalField:
    """Test NodalField validation."""

    def test_wrong_length(self, unit_mesh):
        """Test a field with the wrong node count."""
        with pytest.raises(FieldError, match="shape"):
            NodalField(unit_mesh, np.zeros(5))

    def test_non_finite(self, unit_mesh):
        """Test NaN values are rejected."""
        values = np.zeros(12)
        values[3] = np.nan
        with pytest.raises(FieldError, match="non-finite"):
            NodalField(unit_mesh, values)

    def test_values_are_copied_and_read_only(self, unit_mesh):
        """Test the field owns an immutable copy."""
        source = np.ones(12)
        field = NodalField(unit_mesh, source)
        source[0] = 5.0
        assert field.values[0] == 1.0
        with pytest.raises(ValueError):
            field.values[0] = 2.0

    def test_zeros_min_max(self, unit_mesh):
        """Test zeros helper and extrema."""
        field = NodalField.zeros(unit_mesh)
        assert field.min == field.max == 0.0


class TestLumpedMass:
    """Test lumped_mass."""

    def test_right_triangle(self, right_triangle):
        """Test each vertex carries a third of the area."""
        assert np.allclose(lumped_mass(right_triangle).values, 1 / 6)

    def test_total_equals_area(self, small_mesh):
        """Test the weights sum to the domain area."""
        assert lumped_mass(small_mesh).total == pytest.approx(64.0, rel=1e-13)
        assert (lumped_mass(small_mesh).values > 0).all()

    def test_as_matrix(self, unit_mesh):
        """Test the diagonal matrix form."""
        mass = lumped_mass(unit_mesh)
        assert np.array_equal(mass.as_matrix().diagonal(), mass.values)


class TestStiffness:
    """Test stiffness assembly."""

    def test_right_triangle(self, right_triangle):
        """Test the reference element matrix."""
        expected = 0.5 * np.array([[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])
        assert np.allclose(stiffness(right_triangle).toarray(), expected, atol=1e-15)

    @pytest.mark.parametrize('n', [1, 4, 16])
    def test_sign_structure(self, n):
        """Test nonpositive off-diagonal entries and vanishing row sums on acute meshes."""
        S = stiffness(build_structured_acute_mesh((-4.0, 4.0, -4.0, 4.0), n)).tocoo()
        off = S.row != S.col
        assert S.data[off].max() <= 1e-14
        assert np.abs(np.asarray(S.sum(axis=1))).max() <= 1e-10

    def test_symmetric(self, small_mesh):
        """Test S equals its transpose."""
        S = stiffness(small_mesh)
        assert abs(S - S.T).max() <= 1e-14

    def test_dirichlet_energy_of_linear_function(self, small_mesh):
        """Test ||grad x||^2 equals the domain area."""
        S = stiffness(small_mesh)
        x = small_mesh.nodes[:, 0]
        assert dirichlet_energy(S, x) == pytest.approx(64.0, rel=1e-12)

    def test_element_gradients_exact_for_linear(self, small_mesh):
        """Test gradients of 2x - 3y are reproduced on every element."""
        values = 2.0 * small_mesh.nodes[:, 0] - 3.0 * small_mesh.nodes[:, 1]
        grads = element_gradients(small_mesh, values)
        assert np.allclose(grads, (2.0, -3.0), atol=1e-12)


class TestTruncate:
    """Test nodal truncation."""

    @given(values=values_12, bound=st.floats(0.0, 5.0))
    def test_range_and_idempotence(self, unit_mesh, values, bound):
        """Test truncated values lie in [0, B] and truncation is idempotent."""
        bounds = TruncationBounds(bound)
        once = truncate(NodalField(unit_mesh, values), bounds)
        assert once.min >= 0.0 and once.max <= bound
        assert np.array_equal(truncate(once, bounds).values, once.values)

    @given(values=hnp.arrays(np.float64, 12, elements=st.floats(0.0, 10.0)), bound=st.floats(0.0, 5.0))
    def test_never_adds_mass_to_nonnegative_fields(self, unit_mesh, values, bound):
        """Test truncating a nonnegative field does not increase its mass."""
        mass = lumped_mass(unit_mesh)
        field = NodalField(unit_mesh, values)
        truncated = truncate(field, TruncationBounds(bound))
        assert norms(truncated, mass).mass_integral <= norms(field, mass).mass_integral + 1e-12

    @pytest.mark.parametrize('bound', [-1.0, math.inf, math.nan])
    def test_invalid_bound(self, bound):
        """Test negative and non-finite bounds."""
        with pytest.raises(FieldError):
            TruncationBounds(bound)


class TestComputeBLinf:
    """Test compute_B_Linf."""

    def test_zero_field(self, unit_mesh, gaussian_kernel):
        """Test the zero density gives B = 0."""
        assert compute_B_Linf(gaussian_kernel, NodalField.zeros(unit_mesh), 10.0).B == 0.0

    def test_zero_time(self, unit_mesh, gaussian_kernel):
        """Test T = 0 gives the initial maximum."""
        rho = NodalField(unit_mesh, np.linspace(0.0, 2.0, 12))
        assert compute_B_Linf(gaussian_kernel, rho, 0.0).B == 2.0

    def test_formula(self, unit_mesh):
        """Test B = exp(T |Lap K| mass) max rho for a constant field."""
        kernel = GaussianKernel()
        rho = NodalField(unit_mesh, np.full(12, 0.5))
        expected = math.exp(2.0 * (4.0 / math.pi) * 0.5) * 0.5
        assert compute_B_Linf(kernel, rho, 2.0).B == pytest.approx(expected, rel=1e-12)

    def test_negative_time(self, unit_mesh, gaussian_kernel):
        """Test negative final time."""
        with pytest.raises(ValueError):
            compute_B_Linf(gaussian_kernel, NodalField.zeros(unit_mesh), -1.0)

    def test_negative_density(self, unit_mesh, gaussian_kernel):
        """Test negative initial data."""
        values = np.zeros(12)
        values[0] = -1.0
        with pytest.raises(FieldError):
            compute_B_Linf(gaussian_kernel, NodalField(unit_mesh, values), 1.0)

    def test_overflow(self, small_mesh, gaussian_kernel):
        """Test the reference experiment bound does not fit in a float."""
        rho = NodalField(small_mesh, np.full(small_mesh.n_nodes, 0.25))
        with pytest.raises(BoundsOverflowError):
            compute_B_Linf(gaussian_kernel, rho, 150.0)


class TestNodalMap:
    """Test nodal_map."""

    def test_vectorised(self, unit_mesh):
        """Test a numpy function is applied node by node."""
        field = NodalField(unit_mesh, np.arange(12.0))
        assert np.array_equal(nodal_map(field, np.square).values, np.arange(12.0) ** 2)

    def test_scalar_only_function(self, unit_mesh):
        """Test a function defined on floats only."""
        field = NodalField(unit_mesh, np.arange(12.0))
        assert np.allclose(nodal_map(field, math.sqrt).values, np.sqrt(np.arange(12.0)))

    def test_non_finite_result(self, unit_mesh):
        """Test non-finite outputs raise FieldError."""
        field = NodalField(unit_mesh, np.arange(12.0))
        with pytest.raises(FieldError, match="non-finite"):
            nodal_map(field, lambda v: np.log(v))


class TestNorms:
    """Test norms and the consistent L2 norm."""

    def test_constant_field(self, unit_mesh):
        """Test every norm of a constant on the unit square."""
        field = NodalField(unit_mesh, np.full(12, 3.0))
        result = norms(field, lumped_mass(unit_mesh))
        assert result.lumped_L2 == pytest.approx(3.0)
        assert result.L2 == pytest.approx(3.0)
        assert result.L1_lumped == pytest.approx(3.0)
        assert result.Linf_nodal == 3.0
        assert result.mass_integral == pytest.approx(3.0)

    def test_consistent_l2_of_linear_function(self, right_triangle):
        """Test int x^2 over the reference triangle is 1/12."""
        assert consistent_l2(right_triangle, np.array([0.0, 1.0, 0.0])) ** 2 == pytest.approx(1 / 12)

    def test_l1_ignores_sign(self, unit_mesh):
        """Test the lumped L1 norm of a signed field."""
        field = NodalField(unit_mesh, np.full(12, -2.0))
        result = norms(field, lumped_mass(unit_mesh))
        assert result.L1_lumped == pytest.approx(2.0)
        assert result.mass_integral == pytest.approx(-2.0)

    @given(values=values_12)
    def test_lumped_and_consistent_are_equivalent(self, unit_mesh, values):
        """Test L2 <= lumped L2 <= 2 L2 for P1 fields."""
        result = norms(NodalField(unit_mesh, values), lumped_mass(unit_mesh))
        slack = 1e-12 * (1.0 + result.lumped_L2)
        assert result.L2 <= result.lumped_L2 + slack
        assert result.lumped_L2 <= 2.0 * result.L2 + slack

    def test_mismatched_mass(self, unit_mesh, right_triangle):
        """Test a lumped mass from another mesh."""
        with pytest.raises(FieldError):
            norms(NodalField.zeros(unit_mesh), lumped_mass(right_triangle))


class TestSecantDiffusion:
    """Test assemble_secant_diffusion."""

    def test_linear_law_reproduces_stiffness(self, small_mesh):
        """Test A(s) = s gives the stiffness matrix."""
        field = NodalField(small_mesh, small_mesh.nodes[:, 0] + small_mesh.nodes[:, 1] + 5.0)
        D = assemble_secant_diffusion(small_mesh, field, PowerLaw(1.0, 1.0))
        assert abs(D - stiffness(small_mesh)).max() <= 1e-13

    def test_zero_law(self, small_mesh, rng):
        """Test A = 0 gives a zero matrix."""
        field = NodalField(small_mesh, rng.uniform(0.0, 1.0, small_mesh.n_nodes))
        D = assemble_secant_diffusion(small_mesh, field, PowerLaw(0.0, 3.0))
        assert abs(D).max() == 0.0

    def test_symmetric_with_vanishing_sums(self, small_mesh, power_law, rng):
        """Test D is symmetric and annihilates constants."""
        field = NodalField(small_mesh, rng.uniform(0.0, 2.0, small_mesh.n_nodes))
        D = assemble_secant_diffusion(small_mesh, field, power_law)
        assert abs(D - D.T).max() <= 1e-14
        assert np.abs(D @ np.ones(small_mesh.n_nodes)).max() <= 1e-12

    def test_constant_field_gives_zero_matrix(self, small_mesh, right_triangle):
        """Test flat fields give zero slopes in every direction."""
        flat = NodalField(small_mesh, np.full(small_mesh.n_nodes, 0.25))
        assert abs(assemble_secant_diffusion(small_mesh, flat, PowerLaw(0.1, 3.0))).max() == 0.0
        field = NodalField(right_triangle, np.full(3, 2.0))
        assert abs(assemble_secant_diffusion(right_triangle, field, DiffusionLaw(lambda s: s ** 2))).max() == 0.0

    def test_quadratic_law_by_hand(self, right_triangle):
        """Test the slopes of A(s) = s^2 for v = x on the unit right triangle."""
        r = 1.0 - 1.0 / math.sqrt(2.0)
        field = NodalField(right_triangle, right_triangle.nodes[:, 0].copy())
        D = assemble_secant_diffusion(right_triangle, field, PowerLaw(2.0, 2.0)).toarray()
        # incenter (r, r): D_xx = r + 1.5 r, v is flat in y so D_yy = 0
        expected = 0.5 * 2.5 * r * np.array([[1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
        assert np.allclose(D, expected, rtol=1e-12, atol=1e-15)

    def test_field_from_other_mesh(self, small_mesh, unit_mesh, power_law):
        """Test mesh mismatch."""
        with pytest.raises(FieldError):
            assemble_secant_diffusion(small_mesh, NodalField.zeros(unit_mesh), power_law)


class TestConvection:
    """Test assemble_convection."""

    def test_column_sums_vanish(self, small_mesh, rng):
        """Test testing with the constant function annihilates the term."""
        w = NodalField(small_mesh, rng.normal(size=small_mesh.n_nodes))
        C = assemble_convection(small_mesh, w)
        assert np.abs(np.ones(small_mesh.n_nodes) @ C).max() <= 1e-12

    def test_constant_velocity_potential(self, small_mesh):
        """Test a constant w gives no transport."""
        C = assemble_convection(small_mesh, NodalField(small_mesh, np.full(small_mesh.n_nodes, 7.0)))
        assert abs(C).max() == 0.0

    def test_single_element_by_hand(self, right_triangle):
        """Test C[a, b] = |E|/3 grad w . grad phi_a for w = x on the unit right triangle."""
        w = NodalField(right_triangle, right_triangle.nodes[:, 0].copy())
        C = assemble_convection(right_triangle, w).toarray()
        expected = np.repeat(np.array([[-1.0], [1.0], [0.0]]) / 6.0, 3, axis=1)
        assert np.allclose(C, expected, rtol=1e-14, atol=1e-16)

    def test_linear_potential_moment(self, small_mesh):
        """Test x^T C 1 = int grad w . grad x for w = y + 2x."""
        w = NodalField(small_mesh, small_mesh.nodes[:, 1] + 2.0 * small_mesh.nodes[:, 0])
        C = assemble_convection(small_mesh, w)
        x = small_mesh.nodes[:, 0]
        assert x @ (C @ np.ones(small_mesh.n_nodes)) == pytest.approx(2.0 * 64.0, rel=1e-12)


class TestMonotoneGradientGap:
    """Test the monotone-gradient inequality on the acute mesh."""

    @pytest.mark.parametrize('t_final', [0.0, 1.0])
    def test_truncated_power_law(self, coarse_mesh, rng, t_final):
        """Test the per-element gap stays nonpositive for random nonnegative fields."""
        law = PowerLaw(0.1, 3.0)
        mass = lumped_mass(coarse_mesh)
        kernel = GaussianKernel()
        for _ in range(100):
            rho = NodalField(coarse_mesh, rng.uniform(0.0, 0.05, coarse_mesh.n_nodes))
            truncated = law.truncated(compute_B_Linf(kernel, rho, t_final, mass).B)
            gap = monotone_gradient_gap(coarse_mesh, rho, truncated, truncated.lipschitz())
            assert gap.max() <= 1e-12

    def test_identity_law_has_zero_gap(self, small_mesh, rng):
        """Test f(s) = s with L = 1 gives equality."""
        rho = NodalField(small_mesh, rng.uniform(0.0, 1.0, small_mesh.n_nodes))
        gap = monotone_gradient_gap(small_mesh, rho, lambda s: s, 1.0)
        assert np.abs(gap).max() <= 1e-12
