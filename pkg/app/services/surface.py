"""
Surface data (a, mu) on a rectangle of the w = u + iv plane, and the
pointwise Weierstrass integrand of the theta-family.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from app.errors import EvalSingularity, InvalidDomain, RegularityError
from app.services.expr import HolomorphicFn
from app.services.minkowski import CVec4, RVec4
from app.services.roots import find_zeros

logger = logging.getLogger(__name__)

REGULARITY_EPS = 1e-9
PROBE_GRID = 64


@dataclass(frozen=True)
class Domain:
    """Closed rectangle [u_min, u_max] x [v_min, v_max]."""

    u_min: float
    u_max: float
    v_min: float
    v_max: float

    def __post_init__(self):
        bounds = (self.u_min, self.u_max, self.v_min, self.v_max)
        if not all(np.isfinite(bounds)):
            raise InvalidDomain(f"domain bounds must be finite, got {bounds}")
        if not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise InvalidDomain(f"degenerate domain {bounds}")

    @classmethod
    def from_bounds(cls, bounds) -> "Domain":
        u_min, u_max, v_min, v_max = (float(x) for x in bounds)
        return cls(u_min, u_max, v_min, v_max)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (self.u_min, self.u_max, self.v_min, self.v_max)

    def contains(self, w, slack: float = 0.0):
        w = np.asarray(w, dtype=complex)
        inside = (
            (w.real >= self.u_min - slack) & (w.real <= self.u_max + slack)
            & (w.imag >= self.v_min - slack) & (w.imag <= self.v_max + slack)
        )
        return bool(inside) if inside.ndim == 0 else inside

    def axes(self, nu: int, nv: int) -> tuple[np.ndarray, np.ndarray]:
        if nu < 2 or nv < 2:
            raise InvalidDomain(f"grid must be at least 2x2, got {nu}x{nv}")
        return np.linspace(self.u_min, self.u_max, nu), np.linspace(self.v_min, self.v_max, nv)

    def grid(self, nu: int, nv: int) -> np.ndarray:
        """Complex node array of shape (nu, nv); first axis runs along u."""
        u, v = self.axes(nu, nv)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        return uu + 1j * vv

    def spacing(self, nu: int, nv: int) -> tuple[float, float]:
        return (self.u_max - self.u_min) / (nu - 1), (self.v_max - self.v_min) / (nv - 1)

    def shrink(self, margin: float) -> "Domain":
        return Domain(self.u_min + margin, self.u_max - margin, self.v_min + margin, self.v_max - margin)

    def intersection(self, other: "Domain") -> "Domain":
        return Domain(
            max(self.u_min, other.u_min), min(self.u_max, other.u_max),
            max(self.v_min, other.v_min), min(self.v_max, other.v_max),
        )


def _vec4(values, name: str) -> np.ndarray:
    vector = np.asarray(values, dtype=float)
    if vector.shape != (4,) or not np.all(np.isfinite(vector)):
        raise InvalidDomain(f"{name} must be 4 finite reals, got {values!r}")
    return vector


@dataclass(frozen=True, eq=False)
class SurfaceData:
    """
    Holomorphic data of one theta-family.

    ``P`` offsets the family F = P + 2 Re(...), ``Q`` the conjugate family
    H = Q + 2 Im(...). theta is not stored: one data set generates every member.
    """

    a: HolomorphicFn
    mu: HolomorphicFn
    domain: Domain
    w0: complex
    P: RVec4 = field(default_factory=lambda: np.zeros(4))
    Q: RVec4 = field(default_factory=lambda: np.zeros(4))

    def __post_init__(self):
        object.__setattr__(self, "w0", complex(self.w0))
        object.__setattr__(self, "P", _vec4(self.P, "P"))
        object.__setattr__(self, "Q", _vec4(self.Q, "Q"))
        if not self.domain.contains(self.w0):
            raise InvalidDomain(f"base point {self.w0} lies outside {self.domain.bounds}")

    @classmethod
    def from_sources(cls, a: str, mu: str, domain, w0, P=None, Q=None) -> "SurfaceData":
        if not isinstance(domain, Domain):
            domain = Domain.from_bounds(domain)
        if not isinstance(w0, (complex, float, int)):
            w0 = complex(*w0)
        return cls(
            a=HolomorphicFn.parse(a),
            mu=HolomorphicFn.parse(mu),
            domain=domain,
            w0=w0,
            P=np.zeros(4) if P is None else P,
            Q=np.zeros(4) if Q is None else Q,
        )

    def b(self, theta: float, w):
        """e^{i theta} a(w)"""
        return np.exp(1j * theta) * self.a(w)


def w_vector(a, b) -> CVec4:
    """W(a, b) = (a + b, 1 + ab, i(1 - ab), a - b), stacked on a new last axis."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ab = a * b
    return np.stack([a + b, 1 + ab, 1j * (1 - ab), a - b], axis=-1)


def integrand(sd: SurfaceData, theta: float, w) -> CVec4:
    """f_w = mu(w) W(a(w), e^{i theta} a(w)); broadcasts over array ``w``."""
    a = sd.a(w)
    mu = np.asarray(sd.mu(w), dtype=complex)
    return mu[..., None] * w_vector(a, np.exp(1j * theta) * a)


def validate_regularity(
    sd: SurfaceData,
    n: int = PROBE_GRID,
    eps: float = REGULARITY_EPS,
    domain: Domain | None = None,
) -> None:
    """
    Fail fast when the data is singular on the domain.

    Rejects |mu| <= eps or ||a| - 1| <= eps at a probe node, a sign change of
    |a| - 1 between neighbouring probe nodes, and refined zeros of mu inside
    the domain.
    """
    domain = domain or sd.domain
    nodes = domain.grid(n, n)
    try:
        mu_abs = np.abs(sd.mu(nodes))
        gap = np.abs(sd.a(nodes)) - 1.0
    except EvalSingularity as err:
        raise RegularityError(f"data is not defined on the whole domain: {err}") from err

    worst = np.unravel_index(np.argmin(mu_abs), mu_abs.shape)
    if mu_abs[worst] <= eps:
        raise RegularityError(
            f"|mu| = {mu_abs[worst]:.3e} at w = {nodes[worst]:.6g}", worst_node=complex(nodes[worst])
        )

    worst = np.unravel_index(np.argmin(np.abs(gap)), gap.shape)
    if abs(gap[worst]) <= eps:
        raise RegularityError(
            f"||a| - 1| = {abs(gap[worst]):.3e} at w = {nodes[worst]:.6g}", worst_node=complex(nodes[worst])
        )

    side = np.sign(gap)
    for axis in (0, 1):
        crossing = np.diff(side, axis=axis) != 0
        if np.any(crossing):
            i, j = np.argwhere(crossing)[0]
            node = complex(nodes[i, j])
            raise RegularityError(f"|a| = 1 is crossed next to w = {node:.6g}", worst_node=node)

    for root in find_zeros(sd.mu, domain, (n, n)):
        if root.converged:
            raise RegularityError(f"mu vanishes at w = {root.w:.6g}", worst_node=root.w)

    logger.debug(
        f"Regularity ok on {n}x{n}: min|mu|={mu_abs.min():.3e}, min||a|-1|={np.abs(gap).min():.3e}"
    )
