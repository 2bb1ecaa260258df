"""
Differential geometry of the theta-family: conformal factor, Gauss curvature
(closed form and finite-difference), lightlike normals and the normal frame,
Weingarten factors, planar points, flatness and the hyperbolic Gauss map.

Every function taking ``w`` accepts a complex scalar or an array of any shape;
vector results carry the 4 components on a trailing axis.
"""
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from app.errors import DegenerateMetric, InvalidHyperbolicPoint
from app.services.minkowski import RVec4, hermitian_dot, lorentz_dot
from app.services.roots import NEWTON_MAXITER, NEWTON_TOL, Root, find_zeros
from app.services.surface import Domain, SurfaceData, integrand

logger = logging.getLogger(__name__)

PLANAR_TOL = 1e-10
HYPERBOLIC_TOL = 1e-9
SLICE_TOL = 1e-6
FD_STEP = 1e-3


def _out(value):
    """Collapse 0-d arrays to Python scalars."""
    if np.ndim(value) == 0:
        value = np.asarray(value).item()
    return value


def is_maximal_slice(theta: float, tol: float = SLICE_TOL) -> bool:
    """theta = 0 mod 2pi: the member lies in R^3_1 (x3 constant)."""
    return abs(np.angle(np.exp(1j * theta))) <= tol


def is_euclidean_slice(theta: float, tol: float = SLICE_TOL) -> bool:
    """theta = pi mod 2pi: the member lies in E^3 (x0 constant)."""
    return abs(abs(np.angle(np.exp(1j * theta))) - np.pi) <= tol


# ---------------------------------------------------------------------------
# Metric and curvature
# ---------------------------------------------------------------------------

def _metric_parts(sd: SurfaceData, theta: float, w):
    a = np.asarray(sd.a(w), dtype=complex)
    mu2 = np.abs(np.asarray(sd.mu(w), dtype=complex)) ** 2
    s = np.abs(a) ** 2
    D = 1.0 - 2.0 * s * np.cos(theta) + s * s
    return a, mu2, s, D


def lambda2(sd: SurfaceData, theta: float, w):
    """4|mu|^2 (1 - 2|a|^2 cos(theta) + |a|^4)"""
    _, mu2, _, D = _metric_parts(sd, theta, w)
    return _out(4.0 * mu2 * D)


def lambda2_from_fw(fw):
    """2 <f_w, conj f_w>, the conformal factor read off the integrand."""
    return _out(2.0 * np.real(hermitian_dot(fw, fw)))


def gauss_curvature_closed(sd: SurfaceData, theta: float, w):
    """
    |a'|^2 ((1 + |a|^4) cos(theta) - 2|a|^2) / (|mu|^2 D^3),
    D = 1 - 2|a|^2 cos(theta) + |a|^4.
    """
    _, mu2, s, D = _metric_parts(sd, theta, w)
    a_prime2 = np.abs(np.asarray(sd.a.derivative(w), dtype=complex)) ** 2
    return _out(a_prime2 * ((1.0 + s * s) * np.cos(theta) - 2.0 * s) / (mu2 * D**3))


def gauss_curvature_maximal(sd: SurfaceData, w):
    """theta = 0 specialisation: |a'|^2 / (|mu|^2 (1 - |a|^2)^4)."""
    _, mu2, s, _ = _metric_parts(sd, 0.0, w)
    a_prime2 = np.abs(np.asarray(sd.a.derivative(w), dtype=complex)) ** 2
    return _out(a_prime2 / (mu2 * (1.0 - s) ** 4))


def gauss_curvature_euclidean(sd: SurfaceData, w):
    """theta = pi specialisation: -|a'|^2 / (|mu|^2 (1 + |a|^2)^4)."""
    _, mu2, s, _ = _metric_parts(sd, np.pi, w)
    a_prime2 = np.abs(np.asarray(sd.a.derivative(w), dtype=complex)) ** 2
    return _out(-a_prime2 / (mu2 * (1.0 + s) ** 4))


def _laplacian(field: np.ndarray, step: int, h: float) -> np.ndarray:
    s = step
    centre = field[..., s:-s, s:-s]
    total = (
        field[..., 2 * s:, s:-s] + field[..., :-2 * s, s:-s]
        + field[..., s:-s, 2 * s:] + field[..., s:-s, :-2 * s]
        - 4.0 * centre
    )
    return total / (s * h) ** 2


def gauss_curvature_numeric(lam2: np.ndarray, h: float, richardson: bool = True) -> np.ndarray:
    """
    K = -Laplacian(ln lambda^2) / (2 lambda^2) on a uniform grid of spacing ``h``.

    The grid occupies the last two axes. The 5-point stencil is used at steps
    h and 2h and combined as (4 L_h - L_2h) / 3 when ``richardson`` is set.
    Nodes without a full stencil are NaN.
    """
    lam2 = np.asarray(lam2, dtype=float)
    if not np.all(lam2 > 0):
        raise DegenerateMetric("conformal factor is not positive on the stencil")
    log_lam2 = np.log(lam2)

    margin = 2 if richardson else 1
    if lam2.shape[-1] <= 2 * margin or lam2.shape[-2] <= 2 * margin:
        raise ValueError(f"grid {lam2.shape[-2:]} too small for a margin of {margin}")

    if richardson:
        fine = _laplacian(log_lam2, 1, h)[..., 1:-1, 1:-1]
        coarse = _laplacian(log_lam2, 2, h)
        lap = (4.0 * fine - coarse) / 3.0
    else:
        lap = _laplacian(log_lam2, 1, h)

    K = np.full(lam2.shape, np.nan)
    inner = (..., slice(margin, -margin), slice(margin, -margin))
    K[inner] = -lap / (2.0 * lam2[inner])
    return K


@dataclass(frozen=True, eq=False)
class CurvatureField:
    w: np.ndarray
    k_closed: np.ndarray
    k_numeric: np.ndarray
    is_planar: np.ndarray

    @property
    def relative_error(self) -> np.ndarray:
        return np.abs(self.k_closed - self.k_numeric) / (1.0 + np.abs(self.k_closed))


def curvature_field(
    sd: SurfaceData,
    theta: float,
    nodes: np.ndarray,
    h: float = FD_STEP,
    planar_tol: float = PLANAR_TOL,
    richardson: bool = True,
) -> CurvatureField:
    """
    Both curvature routes at ``nodes``. The numerical route samples lambda^2
    from the integrand on a local 5x5 stencil of spacing ``h`` around each node.
    """
    nodes = np.asarray(nodes, dtype=complex)
    offsets = np.arange(-2, 3) * h
    stencil = nodes[..., None, None] + offsets[:, None] + 1j * offsets[None, :]
    lam2 = lambda2_from_fw(integrand(sd, theta, stencil))
    k_numeric = gauss_curvature_numeric(lam2, h, richardson=richardson)[..., 2, 2]
    return CurvatureField(
        w=nodes,
        k_closed=np.asarray(gauss_curvature_closed(sd, theta, nodes)),
        k_numeric=k_numeric,
        is_planar=np.abs(np.asarray(sd.a.derivative(nodes))) < planar_tol,
    )


# ---------------------------------------------------------------------------
# Normals and frame
# ---------------------------------------------------------------------------

def lightlike_normals(a, theta: float) -> tuple[RVec4, RVec4]:
    """
    L3(a) = (1 + |a|^2, 2 Re a, 2 Im a, |a|^2 - 1) and
    L0(b) = (1 + |b|^2, 2 Re b, 2 Im b, 1 - |b|^2) with b = e^{i theta} a.
    """
    a = np.asarray(a, dtype=complex)
    b = np.exp(1j * theta) * a
    s = np.abs(a) ** 2
    L3 = np.stack([1.0 + s, 2.0 * a.real, 2.0 * a.imag, s - 1.0], axis=-1)
    L0 = np.stack([1.0 + s, 2.0 * b.real, 2.0 * b.imag, 1.0 - s], axis=-1)
    return L3, L0


@dataclass(frozen=True, eq=False)
class FrameAtPoint:
    """Normal frame (tau, nu) and tangent frame (e1, e2); arrays when sampled on a grid."""

    tau: RVec4
    nu: RVec4
    e1: RVec4
    e2: RVec4
    lambda2: float | np.ndarray


def frame(sd: SurfaceData, theta: float, w) -> FrameAtPoint:
    """
    tau = (L3 + L0) / sqrt(-2 <L3, L0>) and nu = (L3 - L0) / sqrt(-2 <L3, L0>),
    built componentwise so that tau^3 and nu^0 are exactly zero.
    """
    a, mu2, s, D = _metric_parts(sd, theta, w)
    if np.any(D <= 0) or np.any(mu2 <= 0):
        raise DegenerateMetric(f"metric degenerates at theta={theta:.6g}")

    b = np.exp(1j * theta) * a
    root = np.asarray(np.sqrt(D))
    zero = np.zeros_like(s)
    tau = np.stack([1.0 + s, (a + b).real, (a + b).imag, zero], axis=-1) / root[..., None]
    nu = np.stack([zero, (a - b).real, (a - b).imag, s - 1.0], axis=-1) / root[..., None]

    fw = integrand(sd, theta, w)
    lam2 = 4.0 * mu2 * D
    lam = np.asarray(np.sqrt(lam2))[..., None]
    e1 = 2.0 * fw.real / lam
    e2 = -2.0 * fw.imag / lam
    return FrameAtPoint(tau=tau, nu=nu, e1=e1, e2=e2, lambda2=_out(lam2))


def frame_defect(fr: FrameAtPoint):
    """Largest deviation among the inner-product identities of an orthonormal frame, per node."""
    vectors = (fr.tau, fr.nu, fr.e1, fr.e2)
    expected = np.diag([-1.0, 1.0, 1.0, 1.0])
    worst = None
    for i in range(4):
        for j in range(i, 4):
            deviation = np.abs(lorentz_dot(vectors[i], vectors[j]) - expected[i, j])
            worst = deviation if worst is None else np.maximum(worst, deviation)
    return _out(worst)


# ---------------------------------------------------------------------------
# Weingarten factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WeingartenData:
    eta: complex | np.ndarray
    omega: complex | np.ndarray
    psi: float | np.ndarray
    psi_defined: bool | np.ndarray
    xi: complex | np.ndarray
    phi: float | np.ndarray
    phi_defined: bool | np.ndarray


def weingarten(sd: SurfaceData, w) -> WeingartenData:
    """
    eta = a' / (conj(mu) (1 - |a|^2)^2) on the theta = 0 member, Omega = 2 mu a',
    and the Euclidean factor xi = a' / (conj(mu) (1 + |a|^2)^2) of theta = pi.
    Phases are principal arguments, undefined where the factor vanishes.
    """
    a = np.asarray(sd.a(w), dtype=complex)
    mu = np.asarray(sd.mu(w), dtype=complex)
    a_prime = np.asarray(sd.a.derivative(w), dtype=complex)
    s = np.abs(a) ** 2

    eta = a_prime / (np.conj(mu) * (1.0 - s) ** 2)
    xi = a_prime / (np.conj(mu) * (1.0 + s) ** 2)
    psi_defined = eta != 0
    phi_defined = xi != 0
    return WeingartenData(
        eta=_out(eta),
        omega=_out(2.0 * mu * a_prime),
        psi=_out(np.where(psi_defined, np.angle(eta), np.nan)),
        psi_defined=_out(psi_defined),
        xi=_out(xi),
        phi=_out(np.where(phi_defined, np.angle(xi), np.nan)),
        phi_defined=_out(phi_defined),
    )


def wirtinger_derivative(field, nodes, h: float = FD_STEP, richardson: bool = True):
    """d/dw = (d/du - i d/dv) / 2 of ``field(w)`` by central differences."""

    def central(step: float):
        d_u = (field(nodes + step) - field(nodes - step)) / (2.0 * step)
        d_v = (field(nodes + 1j * step) - field(nodes - 1j * step)) / (2.0 * step)
        return 0.5 * (d_u - 1j * d_v)

    if not richardson:
        return central(h)
    return (4.0 * central(h) - central(2.0 * h)) / 3.0


@dataclass(frozen=True)
class WeingartenReport:
    max_residual: float
    component_residuals: tuple[float, float, float, float]
    worst_node: complex


def weingarten_check(
    sd: SurfaceData,
    theta: float,
    nodes,
    h: float = FD_STEP,
    richardson: bool = True,
) -> WeingartenReport:
    """
    Compare a finite-difference derivative of the normal with its Weingarten form.

    theta = 0: tau_w against sign(1 - |a|^2) eta conj(f_w).
    theta = pi: nu_w against xi conj(f_w).
    """
    nodes = np.atleast_1d(np.asarray(nodes, dtype=complex))
    data = weingarten(sd, nodes)
    fw = integrand(sd, theta, nodes)

    if is_maximal_slice(theta):
        normal = lambda z: frame(sd, theta, z).tau  # noqa: E731
        s = np.abs(np.asarray(sd.a(nodes))) ** 2
        factor = np.sign(1.0 - s) * data.eta
    elif is_euclidean_slice(theta):
        normal = lambda z: frame(sd, theta, z).nu  # noqa: E731
        factor = np.asarray(data.xi)
    else:
        raise ValueError(f"Weingarten factors exist only for theta = 0 or pi, got {theta}")

    derivative = wirtinger_derivative(normal, nodes, h=h, richardson=richardson)
    residual = np.abs(derivative - np.asarray(factor)[..., None] * np.conj(fw))
    per_node = np.linalg.norm(residual, axis=-1)
    worst = np.unravel_index(np.argmax(per_node), per_node.shape)
    components = residual.reshape(-1, 4).max(axis=0)
    return WeingartenReport(
        max_residual=float(per_node[worst]),
        component_residuals=tuple(float(c) for c in components),
        worst_node=complex(nodes[worst]),
    )


# ---------------------------------------------------------------------------
# Planar points and flatness
# ---------------------------------------------------------------------------

def planar_points(
    sd: SurfaceData,
    domain: Domain | None = None,
    grid: tuple[int, int] = (64, 64),
    tol: float = PLANAR_TOL,
    maxiter: int = NEWTON_MAXITER,
) -> list[Root]:
    """
    Zeros of a' (the planar points of every member of the family).

    When a' is below ``tol`` on the whole scan grid every node is returned.
    """
    domain = domain or sd.domain
    a_prime = sd.a.prime()
    nodes = domain.grid(*grid)
    modulus = np.abs(a_prime(nodes))
    if np.all(modulus < tol):
        logger.info("a' vanishes on the whole scan grid")
        return [Root(complex(z), float(m), True) for z, m in zip(nodes.ravel(), modulus.ravel())]
    roots = find_zeros(a_prime, domain, grid, tol=min(tol, NEWTON_TOL), maxiter=maxiter)
    logger.debug(f"Planar scan on {grid[0]}x{grid[1]}: {len(roots)} point(s)")
    return roots


class Flatness(str, Enum):
    FULLY_PLANAR = "fully_planar"
    HAS_NONPLANAR_POINT = "has_nonplanar_point"


@dataclass(frozen=True)
class FlatnessReport:
    kind: Flatness
    max_abs_a_prime: float
    l3_spread: float        # max deviation of L3(a) from its mean over the grid
    l0_spread: float


def flatness_classify(sd: SurfaceData, nodes, tol: float = PLANAR_TOL, theta: float = 0.0) -> FlatnessReport:
    """
    a' identically zero on the grid means a is constant, so the lightlike
    normals are constant and every member of the family is flat.
    """
    nodes = np.asarray(nodes, dtype=complex)
    max_a_prime = float(np.max(np.abs(sd.a.derivative(nodes))))
    L3, L0 = lightlike_normals(sd.a(nodes), theta)
    L3 = L3.reshape(-1, 4)
    L0 = L0.reshape(-1, 4)
    kind = Flatness.FULLY_PLANAR if max_a_prime < tol else Flatness.HAS_NONPLANAR_POINT
    return FlatnessReport(
        kind=kind,
        max_abs_a_prime=max_a_prime,
        l3_spread=float(np.max(np.abs(L3 - L3.mean(axis=0)))),
        l0_spread=float(np.max(np.abs(L0 - L0.mean(axis=0)))),
    )


# ---------------------------------------------------------------------------
# Hyperbolic Gauss map
# ---------------------------------------------------------------------------

def _require_hyperbolic(tau, tol: float) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    if tau.shape[-1] != 4:
        raise InvalidHyperbolicPoint(f"expected 4 components, got shape {tau.shape}")
    t0 = tau[..., 0]
    if np.any(t0 <= 0):
        raise InvalidHyperbolicPoint("tau is not future directed")
    if np.any(np.abs(lorentz_dot(tau, tau) + 1.0) > tol * (1.0 + t0**2)):
        raise InvalidHyperbolicPoint("tau is not a unit timelike vector")
    if np.any(np.abs(tau[..., 3]) > tol * (1.0 + t0)):
        raise InvalidHyperbolicPoint("tau does not lie in the hyperplane x3 = 0")
    return tau


def gauss_map_stereo(tau, tol: float = HYPERBOLIC_TOL):
    """Disk coordinate (tau^1 + i tau^2) / (tau^0 + 1) of a point of H^2."""
    tau = _require_hyperbolic(tau, tol)
    return _out((tau[..., 1] + 1j * tau[..., 2]) / (tau[..., 0] + 1.0))


def phi_map(tau, tol: float = HYPERBOLIC_TOL) -> RVec4:
    """(0, tau^1, tau^2, -1) / tau^0: H^2 onto the south hemisphere of the unit sphere."""
    tau = _require_hyperbolic(tau, tol)
    t0 = tau[..., 0]
    image = np.stack([np.zeros_like(t0), tau[..., 1], tau[..., 2], -np.ones_like(t0)], axis=-1)
    return image / t0[..., None]


def north_stereographic(x: RVec4):
    """(x1 + i x2) / (1 - x3) for a point (0, x1, x2, x3) of the unit sphere."""
    x = np.asarray(x, dtype=float)
    return _out((x[..., 1] + 1j * x[..., 2]) / (1.0 - x[..., 3]))
