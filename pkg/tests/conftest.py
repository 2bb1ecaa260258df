"""
Shared fixtures: the three worked examples as SurfaceData, closed-form
antiderivatives of their integrands, and seeded generators.
"""
import numpy as np
import pytest

from app.services.surface import SurfaceData


def make_surface(a: str, mu: str, domain, w0) -> SurfaceData:
    return SurfaceData.from_sources(a, mu, domain, w0)


@pytest.fixture
def ex36() -> SurfaceData:
    """mu = 1, a = sin w"""
    return make_surface("sin(w)", "1", (0.2, 1.2, -0.3, 0.3), (0.7, 0.0))


@pytest.fixture
def ex37() -> SurfaceData:
    """mu = exp(-w), a = i exp(w); |a| > 1 on the whole domain"""
    return make_surface("i*exp(w)", "exp(-w)", (0.5, 1.5, -0.5, 0.5), (1.0, 0.0))


@pytest.fixture
def ex38() -> SurfaceData:
    return make_surface("i*cos(w)/(sin(w)+1)", "-0.25*i*(sin(w)+1)", (0.3, 1.3, -0.5, 0.5), (0.8, 0.0))


@pytest.fixture
def flat() -> SurfaceData:
    """Constant a: every member of the family is a plane."""
    return make_surface("0.5", "1", (-0.5, 0.5, -0.5, 0.5), (0.0, 0.0))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240531)


def random_points(rng: np.random.Generator, sd: SurfaceData, count: int) -> np.ndarray:
    d = sd.domain
    return rng.uniform(d.u_min, d.u_max, count) + 1j * rng.uniform(d.v_min, d.v_max, count)


# Antiderivatives G of the integrands; F(theta; w) = P + 2 Re(G(w) - G(w0))

def ex36_antiderivative(theta: float, w):
    e = np.exp(1j * theta)
    w = np.asarray(w, dtype=complex)
    half = w / 2 - np.sin(2 * w) / 4
    return np.stack([
        -(1 + e) * np.cos(w),
        w + e * half,
        1j * (w - e * half),
        -(1 - e) * np.cos(w),
    ], axis=-1)


def ex37_antiderivative(theta: float, w):
    e = np.exp(1j * theta)
    w = np.asarray(w, dtype=complex)
    return np.stack([
        (1 + e) * 1j * w,
        -np.exp(-w) - e * np.exp(w),
        1j * (e * np.exp(w) - np.exp(-w)),
        (1 - e) * 1j * w,
    ], axis=-1)


def ex38_maximal(w):
    u, v = np.real(w), np.imag(w)
    return np.stack([np.sin(u) * np.cosh(v), np.sin(u) * np.sinh(v), u, np.zeros_like(u)], axis=-1)


def ex38_euclidean(w):
    u, v = np.real(w), np.imag(w)
    return np.stack([np.zeros_like(u), v, -np.cos(u) * np.cosh(v), np.sin(u) * np.cosh(v)], axis=-1)
