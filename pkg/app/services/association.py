"""
Associated pairs and graph diagnostics.

A maximal surface X in R^3_1 (x3 constant) and a minimal surface Y in E^3
(x0 constant) on the same w-grid are associated when

    Y3_w = X0_w,    Y1_w = -i X2_w,    Y2_w = i X1_w.

The derivatives are taken by central differences on the samples, so the check
also accepts surfaces given in closed form.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

import numpy as np

from app.errors import GridMismatch, InvalidDomain
from app.services import geometry
from app.services.roots import NEWTON_MAXITER, Root
from app.services.surface import Domain, SurfaceData
from app.services.weierstrass import DEFAULT_QUADRATURE, Quadrature, sample_patches

logger = logging.getLogger(__name__)

PAIR_TOL = 1e-5
GRAPH_TOL = 1e-9
PAIR_LATTICE = 5


class SurfaceGrid(Protocol):
    w: np.ndarray
    points: np.ndarray


@dataclass(frozen=True)
class PairReport:
    max_residuals: tuple[float, float, float]
    grid_spacing: float
    verdict: bool
    tolerance: float = PAIR_TOL

    @property
    def worst(self) -> float:
        return max(self.max_residuals)


def _spacing(w: np.ndarray) -> tuple[float, float]:
    du = w[..., 1:, :].real - w[..., :-1, :].real
    dv = w[..., :, 1:].imag - w[..., :, :-1].imag
    h_u, h_v = float(du.flat[0]), float(dv.flat[0])
    if h_u <= 0 or h_v <= 0:
        raise GridMismatch("grid must increase along both axes")
    if not (np.allclose(du, h_u, rtol=1e-6, atol=0) and np.allclose(dv, h_v, rtol=1e-6, atol=0)):
        raise GridMismatch("grid spacing is not uniform")
    return h_u, h_v


def wirtinger_grid(points: np.ndarray, h_u: float, h_v: float) -> np.ndarray:
    """d/dw of sampled components at interior nodes; grid axes are (-3, -2)."""
    d_u = (points[..., 2:, 1:-1, :] - points[..., :-2, 1:-1, :]) / (2.0 * h_u)
    d_v = (points[..., 1:-1, 2:, :] - points[..., 1:-1, :-2, :]) / (2.0 * h_v)
    return 0.5 * (d_u - 1j * d_v)


def pair_check(X: SurfaceGrid, Y: SurfaceGrid, tol: float = PAIR_TOL) -> PairReport:
    """Residuals of the three associated equations, maximised over interior nodes."""
    if X.w.shape != Y.w.shape or not np.allclose(X.w, Y.w, rtol=0, atol=1e-12):
        raise GridMismatch("surfaces are not sampled on the same w-grid")
    if X.w.shape[-1] < 3 or X.w.shape[-2] < 3:
        raise GridMismatch(f"need at least 3x3 nodes, got {X.w.shape[-2:]}")
    h_u, h_v = _spacing(X.w)

    dX = wirtinger_grid(np.asarray(X.points, dtype=float), h_u, h_v)
    dY = wirtinger_grid(np.asarray(Y.points, dtype=float), h_u, h_v)
    residuals = (
        float(np.max(np.abs(dY[..., 3] - dX[..., 0]))),
        float(np.max(np.abs(dY[..., 1] + 1j * dX[..., 2]))),
        float(np.max(np.abs(dY[..., 2] - 1j * dX[..., 1]))),
    )
    verdict = all(r < tol for r in residuals)
    logger.debug(f"Pair residuals {residuals} at h={max(h_u, h_v):.3g}: {'associated' if verdict else 'not associated'}")
    return PairReport(max_residuals=residuals, grid_spacing=max(h_u, h_v), verdict=verdict, tolerance=tol)


def probe_centres(domain: Domain, h: float, lattice: int = PAIR_LATTICE) -> np.ndarray:
    """A lattice x lattice set of patch centres kept 2h inside ``domain``."""
    return domain.shrink(2.0 * h).grid(lattice, lattice).ravel()


def pair_check_patches(
    sd_x: SurfaceData,
    sd_y: SurfaceData,
    *,
    theta_x: float = 0.0,
    theta_y: float = np.pi,
    h: float = 1e-3,
    lattice: int = PAIR_LATTICE,
    domain: Domain | None = None,
    tol: float = PAIR_TOL,
    jobs: int = 1,
    quadrature: Quadrature = DEFAULT_QUADRATURE,
) -> PairReport:
    """
    pair_check on 3x3 patches of spacing ``h`` around a lattice of centres in
    the common domain, with each surface integrated from its own base point.
    """
    if domain is None:
        try:
            domain = sd_x.domain.intersection(sd_y.domain)
        except InvalidDomain as err:
            raise GridMismatch(f"surface domains do not overlap: {err}") from err
    centres = probe_centres(domain, h, lattice)
    X = sample_patches(sd_x, theta_x, centres, h, jobs=jobs, quadrature=quadrature)
    Y = sample_patches(sd_y, theta_y, centres, h, jobs=jobs, quadrature=quadrature)
    return pair_check(X, Y, tol=tol)


# ---------------------------------------------------------------------------
# Graph charts
# ---------------------------------------------------------------------------

def graph_factors(sd: SurfaceData, w):
    """(x_w, y_w) = (2 mu a, mu (1 + a^2))"""
    a = np.asarray(sd.a(w), dtype=complex)
    mu = np.asarray(sd.mu(w), dtype=complex)
    x_w = 2.0 * mu * a
    y_w = mu * (1.0 + a * a)
    if x_w.ndim == 0:
        return complex(x_w), complex(y_w)
    return x_w, y_w


def graph_jacobian(sd: SurfaceData, w):
    """x_w conj(y_w) - conj(x_w) y_w, which equals 4i |mu|^2 (1 - |a|^2) Im a."""
    x_w, y_w = graph_factors(sd, w)
    value = x_w * np.conj(y_w) - np.conj(x_w) * y_w
    return complex(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True, eq=False)
class GraphReport:
    min_abs_im_a: float
    jacobian_values: np.ndarray
    admissible: bool
    near_zero_nodes: tuple[complex, ...] = ()
    sign_change: bool = False


def graph_admissibility(sd: SurfaceData, nodes, tol: float = GRAPH_TOL) -> GraphReport:
    """
    A graph chart over the (x, y)-plane needs Im a != 0 throughout. Reports the
    nodes where |Im a| <= tol, and whether Im a changes sign across the grid.
    """
    nodes = np.asarray(nodes, dtype=complex)
    im_a = np.imag(np.asarray(sd.a(nodes), dtype=complex))
    near = nodes[np.abs(im_a) <= tol]
    sign_change = bool(np.any(im_a > tol) and np.any(im_a < -tol))
    min_abs = float(np.min(np.abs(im_a)))
    return GraphReport(
        min_abs_im_a=min_abs,
        jacobian_values=np.asarray(graph_jacobian(sd, nodes)),
        admissible=min_abs > tol and not sign_change,
        near_zero_nodes=tuple(complex(z) for z in near),
        sign_change=sign_change,
    )


class Discreteness(str, Enum):
    DISCRETE = "discrete"
    EVERYWHERE = "everywhere"
    EMPTY = "empty"


def planar_discreteness_scan(
    sd: SurfaceData,
    domain: Domain | None = None,
    grid: tuple[int, int] = (64, 64),
    tol: float = geometry.PLANAR_TOL,
    maxiter: int = NEWTON_MAXITER,
) -> tuple[Discreteness, list[Root]]:
    """
    Classify the zero set of a' on ``domain``: empty, the whole grid, or
    isolated points. Two refined roots closer than twice the grid spacing count
    as isolated only if |a'| rises above ``tol`` between them.
    Roots whose Newton refinement fails within ``maxiter`` steps are not counted.
    """
    domain = domain or sd.domain
    nodes = domain.grid(*grid)
    if np.all(np.abs(sd.a.derivative(nodes)) < tol):
        return Discreteness.EVERYWHERE, []

    roots = [r for r in geometry.planar_points(sd, domain, grid, tol=tol, maxiter=maxiter) if r.converged]
    if not roots:
        return Discreteness.EMPTY, []

    spacing = max(domain.spacing(*grid))
    for i, first in enumerate(roots):
        for second in roots[i + 1:]:
            if abs(first.w - second.w) < 2.0 * spacing:
                midpoint = 0.5 * (first.w + second.w)
                if abs(sd.a.derivative(midpoint)) <= tol:
                    logger.info(f"Planar points {first.w:.6g} and {second.w:.6g} are not separated")
                    return Discreteness.EVERYWHERE, roots
    return Discreteness.DISCRETE, roots
