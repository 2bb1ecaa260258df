"""
Tests for the family integrand, path quadrature and grid sampling, checked
against the closed-form antiderivatives of the worked examples.
"""
import numpy as np
import pytest

from app.errors import EvalSingularity, InvalidDomain, QuadratureNoConvergence
from app.services.geometry import lambda2
from app.services.surface import Domain, SurfaceData, integrand, w_vector
from app.services.weierstrass import (
    Quadrature,
    integrate_complex,
    integrate_conjugate,
    integrate_path,
    integrate_point,
    monge_residual,
    sample_grid,
    sample_patches,
    segment_integral,
)
from conftest import ex36_antiderivative, ex37_antiderivative, make_surface, random_points

THETAS = [0.0, np.pi / 3, np.pi]


# =============================================================================
# Pointwise integrand
# =============================================================================

class TestIntegrand:
    def test_w_vector_at_origin(self):
        assert np.array_equal(w_vector(0, 0), [0, 1, 1j, 0])

    def test_w_vector_on_maximal_and_euclidean_slices(self):
        a = 0.3 - 0.7j
        assert np.allclose(w_vector(a, a), [2 * a, 1 + a**2, 1j * (1 - a**2), 0])
        assert np.allclose(w_vector(a, -a), [0, 1 - a**2, 1j * (1 + a**2), 2 * a])

    def test_catenoid_like_data_at_origin(self, ex36):
        assert np.allclose(integrand(ex36, 0.0, 0.0), [0, 1, 1j, 0])

    def test_exponential_data_on_euclidean_slice(self, ex37):
        assert np.allclose(integrand(ex37, np.pi, 0.0), [0, 2, 0, 2j])

    def test_periodic_in_theta(self, ex38, rng):
        w = random_points(rng, ex38, 10)
        assert np.allclose(integrand(ex38, 1.1, w), integrand(ex38, 1.1 + 2 * np.pi, w), atol=1e-13)

    def test_singular_data_propagates(self):
        sd = make_surface("1/(w-0.5)", "1", (0, 1, -1, 1), (0.25, 0))
        with pytest.raises(EvalSingularity):
            integrand(sd, 0.0, 0.5)


class TestMongeResidual:
    def test_null_direction(self):
        null, metric = monge_residual([1, 0, 0, 1], 0.0)
        assert null == 0
        assert metric == 0

    def test_direct_expansion(self):
        null, metric = monge_residual([0, 1, 1j, 0], 4.0)
        assert null == 0
        assert metric == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("theta", THETAS)
    def test_integrand_is_conformal(self, ex38, rng, theta):
        w = random_points(rng, ex38, 40)
        null, metric = monge_residual(integrand(ex38, theta, w), lambda2(ex38, theta, w))
        assert np.max(np.abs(null)) < 1e-12
        assert np.max(np.abs(metric)) < 1e-10


# =============================================================================
# Path integrals
# =============================================================================

class TestIntegratePoint:
    def test_base_point_maps_to_offset(self, ex36):
        sd = SurfaceData(ex36.a, ex36.mu, ex36.domain, ex36.w0, P=[1, 2, 3, 4], Q=[5, 6, 7, 8])
        assert np.array_equal(integrate_point(sd, 0.4, sd.w0).point, [1, 2, 3, 4])
        assert np.array_equal(integrate_conjugate(sd, 0.4, sd.w0).point, [5, 6, 7, 8])

    def test_sample_carries_integrand(self, ex37):
        sample = integrate_point(ex37, 0.5, 1.2 + 0.1j)
        assert np.allclose(sample.fw, integrand(ex37, 0.5, 1.2 + 0.1j))
        assert sample.theta == 0.5

    def test_catenoid_like_maximal_slice_matches_complex_form(self):
        # F(0, w) = Re(-4 cos w, 3w - sin(2w)/2, i(w + sin(2w)/2), 0) + const
        sd = make_surface("sin(w)", "1", (0.0, 0.8, -0.4, 0.4), (0.0, 0.0))

        def closed(w):
            return np.real([-4 * np.cos(w), 3 * w - np.sin(2 * w) / 2, 1j * (w + np.sin(2 * w) / 2), 0])

        w = 0.5 + 0.3j
        expected = closed(w) - closed(sd.w0)
        assert np.allclose(integrate_point(sd, 0.0, w).point, expected, rtol=0, atol=1e-8)

    @pytest.mark.parametrize("theta", THETAS)
    def test_catenoid_like_family(self, ex36, rng, theta):
        for w in random_points(rng, ex36, 5):
            expected = 2 * np.real(ex36_antiderivative(theta, w) - ex36_antiderivative(theta, ex36.w0))
            assert np.allclose(integrate_point(ex36, theta, w).point, expected, rtol=0, atol=1e-8)

    def test_exponential_first_component_real_form(self, ex37):
        theta = 0.7
        u, v = 1.3, -0.2
        u0, v0 = ex37.w0.real, ex37.w0.imag

        def first(u, v):
            return -2 * (u * np.sin(theta) + v * (1 + np.cos(theta)))

        point = integrate_point(ex37, theta, complex(u, v)).point
        assert point[0] == pytest.approx(first(u, v) - first(u0, v0), abs=1e-8)

    def test_conjugate_family_is_family_of_rotated_mu(self, ex37, rng):
        rotated = make_surface("i*exp(w)", "-i*exp(-w)", ex37.domain.bounds, (1.0, 0.0))
        thetas = rng.uniform(0, 2 * np.pi, 10)
        for theta, w in zip(thetas, random_points(rng, ex37, 10)):
            H = integrate_conjugate(ex37, theta, w).point
            F = integrate_point(rotated, theta, w).point
            assert np.allclose(H, F, rtol=0, atol=1e-9)

    def test_complexified_family(self, ex38):
        w = 1.1 - 0.2j
        total = integrate_complex(ex38, 0.3, w)
        assert np.allclose(integrate_point(ex38, 0.3, w).point, 2 * total.real)
        assert np.allclose(integrate_conjugate(ex38, 0.3, w).point, 2 * total.imag)

    @pytest.mark.parametrize("w", [2.0 + 0.0j, 0.7 + 0.5j, -0.1 + 0.0j])
    def test_point_outside_domain(self, ex36, w):
        with pytest.raises(InvalidDomain):
            integrate_point(ex36, 0.0, w)
        with pytest.raises(InvalidDomain):
            integrate_conjugate(ex36, 0.0, w)

    def test_waypoint_outside_domain(self, ex36):
        with pytest.raises(InvalidDomain):
            integrate_path(ex36, 0.0, [ex36.w0, 3.0 + 0.0j, 1.0 + 0.1j])

    def test_boundary_corner_is_accepted(self, ex36):
        corner = complex(ex36.domain.u_max, ex36.domain.v_min)
        assert np.all(np.isfinite(integrate_point(ex36, 0.0, corner).point))

    def test_theta_periodicity(self, ex36):
        w = 1.0 + 0.2j
        first = integrate_point(ex36, 0.9, w).point
        again = integrate_point(ex36, 0.9 + 2 * np.pi, w).point
        assert np.allclose(first, again, rtol=0, atol=1e-10)


class TestPathIndependence:
    @pytest.mark.parametrize("fixture", ["ex36", "ex37", "ex38"])
    def test_two_leg_path_matches_straight_segment(self, fixture, request, rng):
        sd = request.getfixturevalue(fixture)
        ends = random_points(rng, sd, 20)
        middles = random_points(rng, sd, 20)
        thetas = rng.uniform(0, 2 * np.pi, 20)
        for theta, end, middle in zip(thetas, ends, middles):
            straight = integrate_complex(sd, theta, end)
            bent = integrate_path(sd, theta, [sd.w0, middle, end])
            assert np.max(np.abs(2 * (straight - bent))) < 1e-8

    def test_empty_segment(self, ex36):
        assert np.array_equal(segment_integral(ex36, 0.0, 0.5, 0.5), np.zeros(4))

    def test_subdivision_limit_is_reported(self):
        sd = make_surface("exp(40*w)", "1", (0, 1, -1, 1), (0, 0))
        tight = Quadrature(epsabs=1e-14, epsrel=1e-16, limit=1)
        with pytest.raises(QuadratureNoConvergence):
            segment_integral(sd, 0.0, 0.0, 1.0 + 1.0j, tight)


# =============================================================================
# Grids
# =============================================================================

class TestSampleGrid:
    def test_two_by_two_grid_hits_corners(self, ex36):
        surface = sample_grid(ex36, 0.0, 2, 2)
        d = ex36.domain
        assert surface.shape == (2, 2)
        assert surface.w[0, 0] == complex(d.u_min, d.v_min)
        assert surface.w[1, 0] == complex(d.u_max, d.v_min)
        assert surface.w[0, 1] == complex(d.u_min, d.v_max)
        assert surface.w[1, 1] == complex(d.u_max, d.v_max)

    @pytest.mark.parametrize("theta", THETAS)
    def test_exponential_family_matches_closed_form(self, ex37, theta):
        surface = sample_grid(ex37, theta, 17, 17)
        G = ex37_antiderivative(theta, surface.w) - ex37_antiderivative(theta, ex37.w0)
        assert np.max(np.abs(surface.points - 2 * G.real)) < 1e-8
        assert np.max(np.abs(surface.conjugate_points - 2 * G.imag)) < 1e-8

    def test_parallel_rows_match_serial(self, ex38):
        serial = sample_grid(ex38, 1.0, 6, 5)
        parallel = sample_grid(ex38, 1.0, 6, 5, jobs=4)
        assert np.array_equal(serial.points, parallel.points)

    def test_metric_positive_and_monge_small(self, ex38):
        surface = sample_grid(ex38, np.pi / 3, 9, 9)
        assert np.all(surface.lambda2 > 0)
        assert np.max(surface.monge_null) < 1e-10
        assert np.max(surface.monge_metric / (1 + surface.lambda2)) < 1e-8

    def test_maximal_slice_has_constant_last_component(self, ex36):
        surface = sample_grid(ex36, 0.0, 5, 5)
        assert np.all(surface.points[..., 3] == ex36.P[3])

    def test_euclidean_slice_has_constant_time_component(self, ex36):
        surface = sample_grid(ex36, np.pi, 5, 5)
        assert np.max(np.abs(surface.points[..., 0] - ex36.P[0])) < 1e-12

    def test_conjugate_family_is_harmonic_conjugate(self, ex36):
        # F + iH is holomorphic in w, so F_u = H_v and F_v = -H_u
        patch = Domain(0.6, 0.616, -0.008, 0.008)
        surface = sample_grid(ex36, 0.0, 9, 9, domain=patch)
        h_u, h_v = surface.spacing
        F, H = surface.points, surface.conjugate_points
        F_u = (F[2:, 1:-1] - F[:-2, 1:-1]) / (2 * h_u)
        F_v = (F[1:-1, 2:] - F[1:-1, :-2]) / (2 * h_v)
        H_u = (H[2:, 1:-1] - H[:-2, 1:-1]) / (2 * h_u)
        H_v = (H[1:-1, 2:] - H[1:-1, :-2]) / (2 * h_v)
        assert np.max(np.abs(F_u - H_v)) < 1e-5
        assert np.max(np.abs(F_v + H_u)) < 1e-5

    def test_grid_needs_two_nodes(self, ex36):
        with pytest.raises(InvalidDomain):
            sample_grid(ex36, 0.0, 1, 4)

    def test_sub_domain(self, ex36):
        inner = Domain(0.5, 0.9, -0.1, 0.1)
        surface = sample_grid(ex36, 0.0, 3, 3, domain=inner)
        assert surface.w[0, 0] == complex(0.5, -0.1)


class TestSamplePatches:
    def test_patch_points_agree_with_grid(self, ex38):
        h = 1e-2
        centre = 0.8 + 0.1j
        patches = sample_patches(ex38, 0.0, [centre], h)
        assert patches.w.shape == (1, 3, 3)
        direct = integrate_point(ex38, 0.0, patches.w[0, 2, 1]).point
        assert np.allclose(patches.points[0, 2, 1], direct, rtol=0, atol=1e-9)
