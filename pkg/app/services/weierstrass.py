"""
The theta-family F(theta; w) = P + 2 Re I and its conjugate family
H(theta; w) = Q + 2 Im I, where I is the integral of f_w from w0 to w along
straight segments.

Integration uses scipy's adaptive Gauss-Kronrod (21 point) ``quad_vec`` on the
segment parameter t in [0, 1]; the complex integrand is carried as a real
8-vector (real parts, then imaginary parts).
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec

from app.errors import InvalidDomain, QuadratureNoConvergence
from app.services import geometry
from app.services.minkowski import CVec4, RVec4, clorentz_dot
from app.services.surface import Domain, SurfaceData, integrand

logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 200

_STATUS_MESSAGES = {
    1: "subdivision limit reached",
    2: "rounding error dominates the estimate",
}


@dataclass(frozen=True)
class Quadrature:
    """Error target and subdivision limit for path integrals."""

    epsabs: float = QUAD_EPSABS
    epsrel: float = QUAD_EPSREL
    limit: int = QUAD_LIMIT


DEFAULT_QUADRATURE = Quadrature()

# Rounding allowance when a target point sits on the domain boundary
DOMAIN_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class ThetaSample:
    theta: float
    w: complex
    point: RVec4
    fw: CVec4


def monge_residual(fw, lambda2) -> tuple:
    """(<f_w, f_w>, 2 <f_w, conj f_w> - lambda^2); both vanish for conformal data."""
    fw = np.asarray(fw, dtype=complex)
    null = clorentz_dot(fw, fw)
    metric = 2.0 * np.real(clorentz_dot(fw, np.conj(fw))) - np.asarray(lambda2, dtype=float)
    if np.ndim(metric) == 0:
        metric = float(metric)
    return null, metric


def segment_integral(
    sd: SurfaceData,
    theta: float,
    z0: complex,
    z1: complex,
    quadrature: Quadrature = DEFAULT_QUADRATURE,
) -> CVec4:
    """Integral of f_w along the straight segment z0 -> z1."""
    dz = complex(z1) - complex(z0)
    if dz == 0:
        return np.zeros(4, dtype=complex)

    def real_integrand(t: float) -> np.ndarray:
        value = integrand(sd, theta, z0 + t * dz) * dz
        return np.concatenate([value.real, value.imag])

    result, error, info = quad_vec(
        real_integrand, 0.0, 1.0,
        epsabs=quadrature.epsabs, epsrel=quadrature.epsrel,
        norm="max", limit=quadrature.limit, full_output=True,
    )
    if info.status != 0:
        reason = _STATUS_MESSAGES.get(info.status, f"status {info.status}")
        raise QuadratureNoConvergence(
            f"quadrature on [{z0:.6g}, {z1:.6g}] failed: {reason} (error estimate {error:.3e})"
        )
    return result[:4] + 1j * result[4:]


def _require_inside(sd: SurfaceData, points) -> None:
    outside = [complex(z) for z in np.atleast_1d(points) if not sd.domain.contains(z, slack=DOMAIN_SLACK)]
    if outside:
        raise InvalidDomain(f"w = {outside[0]:.6g} lies outside the domain {sd.domain.bounds}")


def integrate_path(
    sd: SurfaceData,
    theta: float,
    waypoints,
    quadrature: Quadrature = DEFAULT_QUADRATURE,
) -> CVec4:
    """Integral of f_w along the polyline through ``waypoints``."""
    points = [complex(z) for z in waypoints]
    _require_inside(sd, points)
    total = np.zeros(4, dtype=complex)
    for start, end in zip(points[:-1], points[1:]):
        total = total + segment_integral(sd, theta, start, end, quadrature)
    return total


def integrate_complex(
    sd: SurfaceData, theta: float, w: complex, quadrature: Quadrature = DEFAULT_QUADRATURE
) -> CVec4:
    """I(theta; w): the integral of f_w from w0 to w. F + iH = (P + iQ) + 2 I."""
    _require_inside(sd, w)
    return segment_integral(sd, theta, sd.w0, w, quadrature)


def integrate_point(
    sd: SurfaceData, theta: float, w: complex, quadrature: Quadrature = DEFAULT_QUADRATURE
) -> ThetaSample:
    w = complex(w)
    total = integrate_complex(sd, theta, w, quadrature)
    return ThetaSample(theta=theta, w=w, point=sd.P + 2.0 * total.real, fw=integrand(sd, theta, w))


def integrate_conjugate(
    sd: SurfaceData, theta: float, w: complex, quadrature: Quadrature = DEFAULT_QUADRATURE
) -> ThetaSample:
    w = complex(w)
    total = integrate_complex(sd, theta, w, quadrature)
    return ThetaSample(theta=theta, w=w, point=sd.Q + 2.0 * total.imag, fw=integrand(sd, theta, w))


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SampledSurface:
    """
    One member of the family on a (nu, nv) grid. Node (i, j) sits at
    u[i] + i v[j]; vector fields carry their components on the last axis.
    """

    theta: float
    domain: Domain
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    points: np.ndarray
    conjugate_points: np.ndarray
    fw: np.ndarray
    lambda2: np.ndarray
    k_closed: np.ndarray
    tau: np.ndarray
    nu: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    monge_null: np.ndarray
    monge_metric: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.w.shape

    @property
    def spacing(self) -> tuple[float, float]:
        return float(self.u[1] - self.u[0]), float(self.v[1] - self.v[0])


def _row_integrals(
    sd: SurfaceData, theta: float, row: np.ndarray, quadrature: Quadrature
) -> np.ndarray:
    """Integrals from w0 to every node of one row, telescoping along the row."""
    totals = np.empty((row.size, 4), dtype=complex)
    totals[0] = segment_integral(sd, theta, sd.w0, row[0], quadrature)
    for j in range(1, row.size):
        totals[j] = totals[j - 1] + segment_integral(sd, theta, row[j - 1], row[j], quadrature)
    return totals


def sample_grid(
    sd: SurfaceData,
    theta: float,
    nu: int,
    nv: int,
    *,
    domain: Domain | None = None,
    jobs: int = 1,
    quadrature: Quadrature = DEFAULT_QUADRATURE,
) -> SampledSurface:
    """
    Sample F(theta; .) with its frame and diagnostics on a regular grid.

    Each row (fixed u) integrates once from w0 to its first node and then
    node to node, so the cost grows linearly with the node count. Rows are
    independent and run on a thread pool of ``jobs`` workers.
    """
    domain = domain or sd.domain
    u, v = domain.axes(nu, nv)
    nodes = domain.grid(nu, nv)

    started = time.time()
    workers = max(1, min(jobs, nu))
    if workers == 1:
        rows = [_row_integrals(sd, theta, nodes[i], quadrature) for i in range(nu)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda i: _row_integrals(sd, theta, nodes[i], quadrature), range(nu)))
    totals = np.stack(rows)
    logger.debug(f"Integrated {nu}x{nv} grid at theta={theta:.6g} in {time.time() - started:.2f}s ({workers} worker(s))")

    fw = integrand(sd, theta, nodes)
    lam2 = np.asarray(geometry.lambda2(sd, theta, nodes))
    fr = geometry.frame(sd, theta, nodes)
    null, metric = monge_residual(fw, lam2)
    return SampledSurface(
        theta=theta,
        domain=domain,
        u=u,
        v=v,
        w=nodes,
        points=sd.P + 2.0 * totals.real,
        conjugate_points=sd.Q + 2.0 * totals.imag,
        fw=fw,
        lambda2=lam2,
        k_closed=np.asarray(geometry.gauss_curvature_closed(sd, theta, nodes)),
        tau=fr.tau,
        nu=fr.nu,
        e1=fr.e1,
        e2=fr.e2,
        monge_null=np.abs(null),
        monge_metric=np.abs(metric),
    )


@dataclass(frozen=True, eq=False)
class PointGrid:
    """Surface points on a w-grid (last two axes of ``w``); may hold a batch of patches."""

    w: np.ndarray
    points: np.ndarray


PATCH_OFFSETS = np.arange(-1, 2)


def patch_nodes(centres, h: float) -> np.ndarray:
    """3x3 patches of spacing ``h`` around each centre, shape (..., 3, 3)."""
    centres = np.asarray(centres, dtype=complex)
    return centres[..., None, None] + h * PATCH_OFFSETS[:, None] + 1j * h * PATCH_OFFSETS[None, :]


def sample_patches(
    sd: SurfaceData,
    theta: float,
    centres,
    h: float,
    *,
    jobs: int = 1,
    quadrature: Quadrature = DEFAULT_QUADRATURE,
) -> PointGrid:
    """
    F(theta; .) on 3x3 patches of spacing ``h``. Each patch integrates once
    from w0 to its centre and then along the short spokes to its neighbours.
    """
    centres = np.atleast_1d(np.asarray(centres, dtype=complex))
    nodes = patch_nodes(centres, h)

    def one_patch(index: int) -> np.ndarray:
        centre = complex(centres.flat[index])
        anchor = segment_integral(sd, theta, sd.w0, centre, quadrature)
        patch = nodes.reshape(-1, 3, 3)[index]
        totals = np.empty((3, 3, 4), dtype=complex)
        for i in range(3):
            for j in range(3):
                totals[i, j] = anchor + segment_integral(sd, theta, centre, patch[i, j], quadrature)
        return totals

    count = centres.size
    if jobs > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=min(jobs, count)) as pool:
            patches = list(pool.map(one_patch, range(count)))
    else:
        patches = [one_patch(index) for index in range(count)]
    totals = np.stack(patches).reshape(nodes.shape + (4,))
    return PointGrid(w=nodes, points=sd.P + 2.0 * totals.real)
