"""
Tests for Grassmannian sampling, slice counting and the Crofton / variation estimators.
"""
import math

import numpy as np
import pytest

from exceptions import OverlappingBallsError, PreconditionError, UnsupportedSliceError
from integral_geometry import (
    GrassmannSample, AffineSubspace, ImplicitSet, BallComplement, ParametricCurve, ball_volume,
    sample_linear_grassmannian, sample_affine_hitting_ball, slice_components, crofton_constant,
    crofton_volume, sphere_area, vitushkin_variation, additivity_residual, lower_bound_statistic,
    maximal_separated_subset, degree_growth,
)
from polynomial_maps import MultiPoly


def _make_quartic():
    """x^4 + y^4 - 1, a smooth closed curve of degree 4."""
    return ImplicitSet([MultiPoly.from_terms(2, [((4, 0), 1.0), ((0, 4), 1.0), ((0, 0), -1.0)])])


class TestGrassmannian:

    def test_linear_sample_is_orthonormal(self, rng):
        sample = sample_linear_grassmannian(2, 5, rng)
        assert sample.frame.shape == (5, 2)
        assert np.allclose(sample.frame.T @ sample.frame, np.eye(2))

    def test_projection_law(self, rng):
        """|<e_1, v>|^2 of a Haar line in R^3 is uniform on average: mean 1/3."""
        values = [sample_linear_grassmannian(1, 3, rng).frame[0, 0] ** 2 for _ in range(4000)]
        assert abs(np.mean(values) - 1.0 / 3.0) < 0.02

    def test_affine_offset_is_orthogonal(self, rng):
        F, weight = sample_affine_hitting_ball(1, 3, 2.0, rng)
        assert abs(float(F.frame[:, 0] @ F.offset)) < 1e-12
        assert np.linalg.norm(F.offset) <= 2.0
        assert weight == pytest.approx(ball_volume(2, 2.0))

    def test_rejects_non_orthogonal_offset(self):
        with pytest.raises(ValueError, match="orthogonal"):
            AffineSubspace(GrassmannSample(np.array([[1.0], [0.0]])), np.array([1.0, 0.0]))

    def test_dimension_range(self, rng):
        with pytest.raises(ValueError):
            sample_affine_hitting_ball(3, 3, 1.0, rng)


class TestImplicitSets:

    def test_zero_polynomial_rejected(self):
        with pytest.raises(ValueError):
            ImplicitSet([MultiPoly.constant(2, 0.0)])

    def test_sphere_contains(self, unit_circle):
        assert unit_circle.contains(np.array([[1.0, 0.0], [0.6, 0.8]])).all()
        assert not unit_circle.contains(np.array([[0.5, 0.5]]))[0]

    def test_ball_complement_field(self):
        region = BallComplement.of([(np.zeros(2), 1.0)])
        assert region.field(np.array([[2.0, 0.0]]))[0] == pytest.approx(1.0)
        assert not region.meets_range(-0.5, -0.1)


class TestSliceComponents:

    def test_line_through_circle(self, unit_circle):
        F = AffineSubspace(GrassmannSample(np.array([[0.0], [1.0]])), np.zeros(2))
        assert slice_components(unit_circle, F, 2.0) == (2, 2)

    def test_line_region_filter(self, unit_circle):
        F = AffineSubspace(GrassmannSample(np.array([[0.0], [1.0]])), np.zeros(2))
        upper = BallComplement.of([(np.array([0.0, -1.0]), 0.5)])
        assert slice_components(unit_circle, F, 2.0, B=upper) == (2, 1)

    def test_plane_through_sphere(self):
        sphere = ImplicitSet.sphere(np.zeros(3), 1.0)
        F = AffineSubspace(GrassmannSample(np.eye(3)[:, :2]), np.array([0.0, 0.0, 0.3]))
        assert slice_components(sphere, F, 1.5) == (1, 1)

    def test_plane_through_circle_pair(self, circle_pair):
        F = AffineSubspace(GrassmannSample(np.eye(2)), np.zeros(2))
        assert slice_components(circle_pair, F, 3.0) == (2, 2)


class TestCrofton:

    def test_circle_length(self, unit_circle):
        estimate = crofton_volume(unit_circle, 1, 2, 20_000, seed=7, R=1.25)
        assert estimate.within(2 * math.pi)
        assert abs(estimate.extras["raw_integral"] - 4.0) <= 3 * estimate.extras["raw_stderr"]

    def test_constant_of_lines_in_plane(self):
        assert crofton_constant(1, 2, 20_000, seed=3).within(2.0 / math.pi)

    def test_constant_independent_of_reference(self, rng):
        reference = sample_linear_grassmannian(1, 3, rng).frame
        a = crofton_constant(1, 3, 20_000, seed=4)
        b = crofton_constant(1, 3, 20_000, seed=5, reference_frame=reference)
        assert abs(a.mean - b.mean) <= 3 * math.hypot(a.stderr, b.stderr)

    def test_full_dimension_constant(self):
        assert crofton_constant(3, 3, 10, seed=0).mean == 1.0

    def test_ellipse_curve(self):
        ellipse = ParametricCurve.ellipse([0.2, -0.1], 1.0, 0.5, angle=0.3)
        estimate = crofton_volume(ellipse, 1, 2, 20_000, seed=11, R=1.5, center=[0.2, -0.1])
        assert estimate.within(ellipse.length, floor=0.02 * ellipse.length)

    def test_segment_length(self):
        segment = ParametricCurve.segment([0.0, 0.0], [1.0, 1.0])
        assert crofton_volume(segment, 1, 2, 20_000, seed=2, R=1.0, center=[0.5, 0.5]).within(math.sqrt(2))

    def test_sphere_area(self):
        assert sphere_area(20_000, seed=13).within(4 * math.pi)

    def test_same_seed_same_bits(self, unit_circle):
        a = crofton_volume(unit_circle, 1, 2, 5_000, seed=21, R=1.25)
        b = crofton_volume(unit_circle, 1, 2, 5_000, seed=21, R=1.25)
        assert a.mean.hex() == b.mean.hex()


class TestVitushkin:

    def test_components_of_disjoint_circles(self, circle_pair):
        assert vitushkin_variation(circle_pair, None, 0, 2, 3.0, 1, seed=0).mean == 2.0

    def test_length_of_circle(self, unit_circle):
        """V_1 of a curve is its Crofton integral without the constant: 4 for the unit circle."""
        estimate = vitushkin_variation(unit_circle, None, 1, 2, 1.5, 20_000, seed=17)
        assert estimate.within(4.0)

    def test_top_variation_of_null_set(self, unit_circle):
        assert vitushkin_variation(unit_circle, None, 2, 2, 1.5, 2_000, seed=1).mean == 0.0

    def test_unsupported_slices(self):
        A = ImplicitSet.sphere(np.zeros(4), 1.0)
        with pytest.raises(UnsupportedSliceError):
            vitushkin_variation(A, None, 1, 4, 1.0, 10, seed=0)


class TestAdditivity:

    def test_residual_within_tolerance(self, unit_circle):
        balls = [(np.array([1.0, 0.0]), 0.5), (np.array([-1.0, 0.0]), 0.5)]
        result = additivity_residual(unit_circle, balls, 1, 4_000, seed=23, R=2.0)
        assert result.within_tolerance

    def test_component_counts_add_up(self):
        small = ImplicitSet.sphere([0.0, 1.0], 0.2)
        balls = [(np.array([0.0, 1.0]), 0.3), (np.array([0.0, -1.0]), 0.3)]
        result = additivity_residual(small, balls, 0, 1, seed=0, R=2.0)
        assert result.lhs == result.rhs == 1.0
        assert result.within_tolerance

    def test_overlapping_balls(self, unit_circle):
        balls = [(np.array([0.0, 0.0]), 1.0), (np.array([1.0, 0.0]), 1.0)]
        with pytest.raises(OverlappingBallsError):
            additivity_residual(unit_circle, balls, 1, 100, seed=0)


class TestLowerBound:

    def test_positive_across_radii(self, unit_circle):
        rows = lower_bound_statistic(unit_circle, [1.0, 0.0], [0.1, 0.2, 0.4], 1, 2_000, seed=5)
        assert [r for r, _, _ in rows] == [0.1, 0.2, 0.4]
        assert all(stat > 0 for _, stat, _ in rows)

    @pytest.mark.parametrize("factor", [0.5, 3.0])
    def test_invariant_under_joint_dilation(self, unit_circle, factor):
        [(_, stat, stderr)] = lower_bound_statistic(unit_circle, [1.0, 0.0], [0.2], 1, 4_000, seed=5)
        dilated = unit_circle.dilate(factor)
        [(r, scaled_stat, scaled_stderr)] = lower_bound_statistic(dilated, [factor, 0.0], [0.2 * factor], 1, 4_000,
                                                                  seed=6)
        assert r == pytest.approx(0.2 * factor)
        assert abs(stat - scaled_stat) <= 3.0 * math.hypot(stderr, scaled_stderr) + 1e-12

    def test_center_must_lie_on_set(self, unit_circle):
        with pytest.raises(PreconditionError):
            lower_bound_statistic(unit_circle, [0.0, 0.0], [0.1], 1, 100, seed=0)


class TestSeparatedSubsets:

    def test_circle(self, unit_circle, rng):
        net = maximal_separated_subset(unit_circle, 0.1, 1.5, rng)
        assert net.flags["maximality_certified"]
        assert np.allclose(np.linalg.norm(net.points, axis=1), 1.0, atol=1e-8)
        assert 31 <= len(net) <= 63

    def test_empty_when_set_is_far(self, rng):
        far = ImplicitSet.sphere([10.0, 0.0], 1.0)
        net = maximal_separated_subset(far, 0.1, 1.0, rng)
        assert net.flags["empty"]
        assert len(net) == 0

    @pytest.mark.parametrize("make_set", [lambda: ImplicitSet.sphere([0.0, 0.0], 1.0), _make_quartic])
    def test_cardinality_scaling(self, make_set):
        A = make_set()
        scaled = []
        for i, eps in enumerate((0.1, 0.05, 0.02)):
            net = maximal_separated_subset(A, eps, 1.5, np.random.default_rng(100 + i))
            scaled.append(len(net) * eps)
        assert max(scaled) <= 4 * min(scaled)


def test_degree_growth_is_polynomial():
    result = degree_growth([1, 2, 4], n_curves=5, N=1_000, seed=31)
    assert result["means"][-1] > 0
    assert result["slope"] < 2.5
