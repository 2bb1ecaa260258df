"""
Tests for the conformal factor, both curvature routes, the normal frame,
Weingarten factors, planar points and the hyperbolic Gauss map.
"""
import numpy as np
import pytest

from app.errors import DegenerateMetric, InvalidHyperbolicPoint
from app.services import geometry
from app.services.geometry import (
    Flatness,
    curvature_field,
    flatness_classify,
    frame,
    frame_defect,
    gauss_curvature_closed,
    gauss_curvature_euclidean,
    gauss_curvature_maximal,
    gauss_curvature_numeric,
    gauss_map_stereo,
    lambda2,
    lambda2_from_fw,
    lightlike_normals,
    north_stereographic,
    phi_map,
    planar_points,
    weingarten,
    weingarten_check,
)
from app.services.minkowski import lorentz_dot
from app.services.surface import Domain, integrand
from conftest import make_surface, random_points


def hyperbolic_point(r: float, phi: float) -> np.ndarray:
    return np.array([np.cosh(r), np.sinh(r) * np.cos(phi), np.sinh(r) * np.sin(phi), 0.0])


# =============================================================================
# Conformal factor and curvature
# =============================================================================

class TestLambda2:
    def test_vanishing_a(self):
        sd = make_surface("0", "2+i", (-1, 1, -1, 1), (0, 0))
        assert lambda2(sd, 0.8, 0.3j) == pytest.approx(20.0)

    def test_catenoid_like_origin(self, ex36):
        for theta in (0.0, 1.0, np.pi):
            assert lambda2(ex36, theta, 0.0) == pytest.approx(4.0)

    def test_maximal_slice_factorises(self, ex38, rng):
        w = random_points(rng, ex38, 20)
        s = np.abs(ex38.a(w)) ** 2
        expected = 4 * np.abs(ex38.mu(w)) ** 2 * (1 - s) ** 2
        assert np.allclose(lambda2(ex38, 0.0, w), expected, rtol=1e-12)

    def test_agrees_with_integrand(self, ex37, rng):
        w = random_points(rng, ex37, 20)
        from_fw = lambda2_from_fw(integrand(ex37, 0.4, w))
        assert np.allclose(from_fw, lambda2(ex37, 0.4, w), rtol=1e-12)


class TestClosedCurvature:
    def test_zero_at_planar_point(self):
        sd = make_surface("w^2", "1", (-0.5, 0.5, -0.5, 0.5), (0, 0))
        assert gauss_curvature_closed(sd, 0.3, 0.0) == 0

    def test_exponential_family_formula(self, ex37, rng):
        theta = 1.2
        w = random_points(rng, ex37, 20)
        u = w.real
        e2u, e4u = np.exp(2 * u), np.exp(4 * u)
        expected = e4u * ((1 + e4u) * np.cos(theta) - 2 * e2u) / (1 - 2 * e2u * np.cos(theta) + e4u) ** 3
        assert np.allclose(gauss_curvature_closed(ex37, theta, w), expected, rtol=1e-10)

    def test_slice_specialisations(self, ex36, rng):
        w = random_points(rng, ex36, 20)
        assert np.allclose(gauss_curvature_maximal(ex36, w), gauss_curvature_closed(ex36, 0.0, w), rtol=1e-12)
        assert np.allclose(gauss_curvature_euclidean(ex36, w), gauss_curvature_closed(ex36, np.pi, w), rtol=1e-12)

    def test_never_zero_when_a_prime_is_nonzero(self, ex38, rng):
        w = random_points(rng, ex38, 50)
        assert np.all(np.abs(gauss_curvature_closed(ex38, 0.0, w)) > 0)
        assert np.all(np.abs(gauss_curvature_closed(ex38, np.pi, w)) > 0)

    @pytest.mark.parametrize("fixture", ["ex36", "ex37", "ex38"])
    def test_sign_law_on_slices(self, fixture, request):
        sd = request.getfixturevalue(fixture)
        nodes = sd.domain.grid(17, 17)
        assert np.min(gauss_curvature_closed(sd, 0.0, nodes)) >= -1e-12
        assert np.max(gauss_curvature_closed(sd, np.pi, nodes)) <= 1e-12


class TestNumericCurvature:
    def test_flat_metric(self):
        K = gauss_curvature_numeric(np.full((7, 7), 3.0), 0.1)
        assert np.all(np.isnan(K[:2]))
        assert np.allclose(K[2:-2, 2:-2], 0, atol=1e-10)

    def test_plain_stencil_margin(self):
        K = gauss_curvature_numeric(np.full((5, 5), 3.0), 0.1, richardson=False)
        assert np.all(np.isnan(K[0]))
        assert np.allclose(K[1:-1, 1:-1], 0, atol=1e-10)

    def test_round_sphere_metric(self):
        # lambda^2 = 4 / (1 + |w|^2)^2 has K = 1
        h = 1e-2
        axis = np.arange(-5, 6) * h + 0.2
        w = axis[:, None] + 1j * axis[None, :]
        lam2 = 4.0 / (1.0 + np.abs(w) ** 2) ** 2
        K = gauss_curvature_numeric(lam2, h)
        assert np.nanmax(np.abs(K - 1.0)) < 1e-6

    def test_degenerate_metric(self):
        lam2 = np.ones((5, 5))
        lam2[2, 2] = 0.0
        with pytest.raises(DegenerateMetric):
            gauss_curvature_numeric(lam2, 0.1)

    def test_grid_too_small(self):
        with pytest.raises(ValueError):
            gauss_curvature_numeric(np.ones((4, 4)), 0.1)

    @pytest.mark.parametrize("fixture", ["ex36", "ex37", "ex38"])
    @pytest.mark.parametrize("theta", [0.0, np.pi / 3, np.pi])
    def test_matches_closed_form_on_examples(self, fixture, theta, request):
        sd = request.getfixturevalue(fixture)
        field = curvature_field(sd, theta, sd.domain.grid(9, 9), h=1e-3)
        assert np.max(field.relative_error) < 1e-4

    def test_matches_closed_form_on_random_polynomials(self, rng):
        for _ in range(5):
            c = rng.uniform(-0.2, 0.2, 6)
            a = f"({c[0]}+{c[1]}*i) + ({c[2]}+{c[3]}*i)*w + ({c[4]}+{c[5]}*i)*w^2"
            sd = make_surface(a, "1 + 0.1*w", (-0.5, 0.5, -0.5, 0.5), (0, 0))
            for theta in (0.0, 2.0, np.pi):
                field = curvature_field(sd, theta, sd.domain.grid(5, 5), h=1e-3)
                assert np.max(field.relative_error) < 1e-4

    def test_euclidean_slice_is_negatively_curved(self, ex36):
        field = curvature_field(ex36, np.pi, ex36.domain.grid(7, 7), h=1e-3)
        assert np.all(field.k_numeric < 0)

    def test_planar_flags(self):
        sd = make_surface("w^2", "1", (-0.5, 0.5, -0.5, 0.5), (0, 0))
        field = curvature_field(sd, 0.0, np.array([0.0, 0.25]))
        assert field.is_planar.tolist() == [True, False]


# =============================================================================
# Normals and frame
# =============================================================================

class TestLightlikeNormals:
    def test_at_zero(self):
        L3, L0 = lightlike_normals(0.0, 1.0)
        assert np.array_equal(L3, [1, 0, 0, -1])
        assert np.array_equal(L0, [1, 0, 0, 1])

    def test_null_and_pairing(self, rng):
        a = rng.normal(size=30) + 1j * rng.normal(size=30)
        theta = rng.uniform(0, 2 * np.pi, 30)
        L3, L0 = lightlike_normals(a, theta)
        assert np.max(np.abs(lorentz_dot(L3, L3))) < 1e-12 * np.max(np.abs(L3)) ** 2
        assert np.max(np.abs(lorentz_dot(L0, L0))) < 1e-12 * np.max(np.abs(L0)) ** 2
        expected = -2 * np.abs(1 - np.abs(a) ** 2 * np.exp(-1j * theta)) ** 2
        assert np.allclose(lorentz_dot(L3, L0), expected, rtol=1e-12)

    def test_pairing_example(self):
        a, theta = 0.3 + 0.1j, np.pi / 3
        L3, L0 = lightlike_normals(a, theta)
        expected = -2 * abs(1 - a * np.conj(a * np.exp(1j * theta))) ** 2
        assert lorentz_dot(L3, L0) == pytest.approx(expected, rel=1e-14)


class TestFrame:
    def test_catenoid_like_maximal_slice(self, ex36, rng):
        w = random_points(rng, ex36, 10)
        a = np.sin(w)
        s = np.abs(a) ** 2
        fr = frame(ex36, 0.0, w)
        tau = np.stack([1 + s, 2 * a.real, 2 * a.imag, np.zeros_like(s)], axis=-1) / (1 - s)[:, None]
        assert np.allclose(fr.tau, tau, rtol=1e-12)
        assert np.allclose(fr.nu, [0, 0, 0, -1], atol=1e-12)

    def test_catenoid_like_euclidean_slice(self, ex36, rng):
        fr = frame(ex36, np.pi, random_points(rng, ex36, 10))
        assert np.allclose(fr.tau, [1, 0, 0, 0], atol=1e-12)

    def test_vanishing_a(self):
        sd = make_surface("0", "1", (-1, 1, -1, 1), (0, 0))
        fr = frame(sd, 2.0, 0.5j)
        assert np.allclose(fr.tau, [1, 0, 0, 0])
        assert np.allclose(fr.nu, [0, 0, 0, -1])

    @pytest.mark.parametrize("fixture", ["ex36", "ex37", "ex38"])
    @pytest.mark.parametrize("theta", [0.0, 1.0, np.pi])
    def test_orthonormal_with_exact_zeros(self, fixture, theta, request):
        sd = request.getfixturevalue(fixture)
        fr = frame(sd, theta, sd.domain.grid(9, 9))
        assert np.max(frame_defect(fr)) < 1e-10
        assert np.all(fr.tau[..., 3] == 0)
        assert np.all(fr.nu[..., 0] == 0)
        assert np.all(fr.tau[..., 0] > 0)

    def test_degenerates_on_unit_circle(self, ex36):
        with pytest.raises(DegenerateMetric):
            frame(ex36, 0.0, np.pi / 2)


# =============================================================================
# Weingarten factors
# =============================================================================

class TestWeingarten:
    def test_planar_point(self):
        sd = make_surface("w^2", "1", (-0.5, 0.5, -0.5, 0.5), (0, 0))
        data = weingarten(sd, 0.0)
        assert data.eta == 0
        assert data.omega == 0
        assert not data.psi_defined
        assert np.isnan(data.psi)

    def test_omega_is_eta_times_half_metric(self, ex38, rng):
        w = random_points(rng, ex38, 20)
        data = weingarten(ex38, w)
        assert np.allclose(data.omega, data.eta * lambda2(ex38, 0.0, w) / 2, rtol=1e-12)

    def test_omega_is_holomorphic(self, ex38, rng):
        h = 1e-5
        for w in random_points(rng, ex38, 10):
            along_u = weingarten(ex38, w + h).omega - weingarten(ex38, w - h).omega
            along_v = weingarten(ex38, w + 1j * h).omega - weingarten(ex38, w - 1j * h).omega
            assert abs(along_u + 1j * along_v) / (4 * h) < 1e-6

    def test_gauss_map_conformal_factor_is_curvature(self, ex36, rng):
        w = random_points(rng, ex36, 20)
        eta = weingarten(ex36, w).eta
        assert np.allclose(np.abs(eta) ** 2, gauss_curvature_closed(ex36, 0.0, w), rtol=1e-12)

    def test_euclidean_factor_is_minus_curvature(self, ex36, rng):
        w = random_points(rng, ex36, 20)
        xi = weingarten(ex36, w).xi
        assert np.allclose(np.abs(xi) ** 2, -gauss_curvature_closed(ex36, np.pi, w), rtol=1e-12)

    def test_phase(self, ex36):
        data = weingarten(ex36, 0.5 + 0.1j)
        assert data.psi_defined
        assert data.psi == pytest.approx(np.angle(data.eta))


class TestWeingartenCheck:
    @pytest.fixture
    def catenoid_like(self):
        return make_surface("sin(w)", "1", (0.2, 1.0, -0.4, 0.4), (0.6, 0.0))

    def test_maximal_slice(self, catenoid_like):
        nodes = catenoid_like.domain.shrink(0.01).grid(9, 9)
        report = weingarten_check(catenoid_like, 0.0, nodes, h=1e-3)
        assert report.max_residual < 1e-4
        assert len(report.component_residuals) == 4

    def test_euclidean_slice(self, catenoid_like):
        nodes = catenoid_like.domain.shrink(0.01).grid(9, 9)
        assert weingarten_check(catenoid_like, np.pi, nodes, h=1e-3).max_residual < 1e-4

    def test_outside_unit_disk(self, ex37):
        nodes = ex37.domain.shrink(0.01).grid(5, 5)
        assert weingarten_check(ex37, 0.0, nodes, h=1e-3).max_residual < 1e-4

    def test_constant_data(self, flat):
        nodes = flat.domain.grid(5, 5)
        assert weingarten_check(flat, 0.0, nodes).max_residual < 1e-10

    def test_second_order_convergence(self, catenoid_like):
        nodes = catenoid_like.domain.shrink(0.05).grid(5, 5)
        coarse = weingarten_check(catenoid_like, 0.0, nodes, h=2e-3, richardson=False).max_residual
        fine = weingarten_check(catenoid_like, 0.0, nodes, h=1e-3, richardson=False).max_residual
        assert 3.5 <= coarse / fine <= 4.5

    def test_generic_theta_rejected(self, ex36):
        with pytest.raises(ValueError):
            weingarten_check(ex36, 1.0, [0.7])


# =============================================================================
# Planar points and flatness
# =============================================================================

class TestPlanarPoints:
    def test_catenoid_like_root(self, ex36):
        scan = Domain(0.0, 4.0, -1.0, 1.0)
        roots = [r for r in planar_points(ex36, scan) if r.converged]
        assert len(roots) == 1
        assert abs(roots[0].w - np.pi / 2) < 1e-6
        assert roots[0].modulus < 1e-10

    def test_exponential_data_has_none(self, ex37):
        assert planar_points(ex37) == []

    def test_quadratic(self):
        sd = make_surface("w^2", "1", (-1, 1, -1, 1), (0.5, 0))
        roots = planar_points(sd)
        assert len(roots) == 1
        assert abs(roots[0].w) < 1e-10

    def test_constant_data_returns_every_node(self, flat):
        roots = planar_points(flat, grid=(4, 4))
        assert len(roots) == 16

    def test_iteration_cap(self):
        sd = make_surface("w^3", "1", (-1, 1, -1, 1), (0.5, 0))
        assert [r.converged for r in planar_points(sd)] == [True]
        capped = planar_points(sd, maxiter=3)
        assert capped
        assert not any(r.converged for r in capped)


class TestFlatness:
    def test_constant_data(self, flat):
        report = flatness_classify(flat, flat.domain.grid(9, 9))
        assert report.kind is Flatness.FULLY_PLANAR
        assert report.l3_spread == 0
        assert report.l0_spread == 0

    def test_catenoid_like(self, ex36):
        report = flatness_classify(ex36, ex36.domain.grid(9, 9))
        assert report.kind is Flatness.HAS_NONPLANAR_POINT
        assert report.l3_spread > 0

    def test_identity_on_tiny_domain(self):
        sd = make_surface("w", "1", (0, 1e-3, 0, 1e-3), (0, 0))
        assert flatness_classify(sd, sd.domain.grid(3, 3)).kind is Flatness.HAS_NONPLANAR_POINT


# =============================================================================
# Hyperbolic Gauss map
# =============================================================================

class TestGaussMap:
    def test_pole(self):
        assert gauss_map_stereo([1, 0, 0, 0]) == 0
        assert np.array_equal(phi_map([1, 0, 0, 0]), [0, 0, 0, -1])

    def test_recovers_a_on_maximal_slice(self, ex36, rng):
        w = random_points(rng, ex36, 20)
        tau = frame(ex36, 0.0, w).tau
        assert np.allclose(gauss_map_stereo(tau), np.sin(w), atol=1e-8)

    def test_modulus_identity(self, rng):
        for r, phi in zip(rng.uniform(0, 3, 20), rng.uniform(0, 2 * np.pi, 20)):
            tau = hyperbolic_point(r, phi)
            z = gauss_map_stereo(tau)
            assert abs(z) < 1
            assert abs(z) ** 2 * (tau[0] + 1) == pytest.approx(tau[0] - 1, abs=1e-12)

    def test_phi_lands_on_south_hemisphere(self, rng):
        for r, phi in zip(rng.uniform(0, 3, 20), rng.uniform(0, 2 * np.pi, 20)):
            image = phi_map(hyperbolic_point(r, phi))
            assert lorentz_dot(image, image) == pytest.approx(1.0, abs=1e-12)
            assert image[3] < 0

    def test_stereographic_consistency(self, rng):
        for r, phi in zip(rng.uniform(0, 3, 20), rng.uniform(0, 2 * np.pi, 20)):
            tau = hyperbolic_point(r, phi)
            assert north_stereographic(phi_map(tau)) == pytest.approx(gauss_map_stereo(tau), abs=1e-12)

    @pytest.mark.parametrize("tau", [
        [-1.0, 0.0, 0.0, 0.0],
        [2.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.5],
    ])
    def test_invalid_points(self, tau):
        with pytest.raises(InvalidHyperbolicPoint):
            gauss_map_stereo(tau)

    @pytest.mark.parametrize("fixture", ["ex36", "ex37", "ex38"])
    def test_gauss_image_misses_north_hemisphere(self, fixture, request):
        sd = request.getfixturevalue(fixture)
        tau = frame(sd, 0.0, sd.domain.grid(9, 9)).tau
        assert np.all(phi_map(tau)[..., 3] < 0)


def test_slice_detection():
    assert geometry.is_maximal_slice(2 * np.pi)
    assert geometry.is_euclidean_slice(-np.pi)
    assert not geometry.is_maximal_slice(np.pi)
