"""
Zeros of a holomorphic function on a rectangle: grid scan for candidate
cells, then complex Newton refinement with scipy.optimize.newton.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy import optimize

from app.errors import EvalSingularity, NewtonNoConvergence
from app.services.expr import HolomorphicFn

if TYPE_CHECKING:
    from app.services.surface import Domain

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-10
NEWTON_MAXITER = 100


@dataclass(frozen=True)
class Root:
    w: complex
    modulus: float          # |f(w)| at the reported point
    converged: bool
    iterations: int = 0


def newton_refine(fn: HolomorphicFn, z0: complex, tol: float = NEWTON_TOL, maxiter: int = NEWTON_MAXITER) -> Root:
    """
    Complex Newton from ``z0`` via scipy. A root is accepted once |f| < tol,
    whatever the step criterion reported; otherwise NewtonNoConvergence.
    """
    with warnings.catch_warnings():
        # a zero derivative is reported through the result flag
        warnings.simplefilter("ignore", RuntimeWarning)
        z, info = optimize.newton(
            fn, complex(z0), fprime=fn.derivative, tol=tol, maxiter=maxiter,
            full_output=True, disp=False,
        )
    z = complex(z)
    if not np.isfinite(z):
        raise NewtonNoConvergence("iterate diverged", z)
    modulus = abs(fn(z))
    if modulus < tol:
        return Root(z, modulus, True, info.iterations)
    raise NewtonNoConvergence(f"{info.flag} after {info.iterations} iterations (|f| = {modulus:.3e})", z)


def _changes_sign(corners: np.ndarray) -> np.ndarray:
    # zero on a corner counts as a change
    return (corners.min(axis=0) <= 0) & (corners.max(axis=0) >= 0)


def candidate_points(nodes: np.ndarray, values: np.ndarray) -> list[complex]:
    """
    Starting points for Newton: centres of cells where both Re f and Im f
    change sign, plus interior nodes where |f| has a local minimum.
    """
    corners = np.stack([values[:-1, :-1], values[1:, :-1], values[:-1, 1:], values[1:, 1:]])
    both = _changes_sign(corners.real) & _changes_sign(corners.imag)
    centres = 0.25 * (nodes[:-1, :-1] + nodes[1:, :-1] + nodes[:-1, 1:] + nodes[1:, 1:])
    starts = [complex(z) for z in centres[both]]

    modulus = np.abs(values)
    if modulus.shape[0] > 2 and modulus.shape[1] > 2:
        centre = modulus[1:-1, 1:-1]
        neighbours = np.stack([
            modulus[i:i + centre.shape[0], j:j + centre.shape[1]]
            for i in range(3) for j in range(3) if (i, j) != (1, 1)
        ])
        # strict against the neighbour mean, so plateaus do not qualify
        minima = np.all(centre <= neighbours, axis=0) & (centre < neighbours.mean(axis=0))
        starts.extend(complex(z) for z in nodes[1:-1, 1:-1][minima])
    return starts


def _safe_modulus(fn: HolomorphicFn, w: complex) -> float:
    try:
        return float(abs(fn(w)))
    except EvalSingularity:
        return float("inf")


def find_zeros(
    fn: HolomorphicFn,
    domain: "Domain",
    grid: tuple[int, int] = (64, 64),
    tol: float = NEWTON_TOL,
    maxiter: int = NEWTON_MAXITER,
) -> list[Root]:
    """
    Refined zeros of ``fn`` inside ``domain``, deduplicated within one grid spacing.

    Candidates whose Newton iteration fails are reported unrefined with
    ``converged=False``; converged iterates leaving the domain are dropped.
    """
    nu, nv = grid
    nodes = domain.grid(nu, nv)
    spacing = max(domain.spacing(nu, nv))
    values = fn(nodes)

    roots: list[Root] = []
    failed: list[Root] = []
    for start in candidate_points(nodes, values):
        try:
            root = newton_refine(fn, start, tol=tol, maxiter=maxiter)
        except (NewtonNoConvergence, EvalSingularity) as err:
            logger.debug(f"Newton from {start:.6g} failed: {err}")
            failed.append(Root(start, _safe_modulus(fn, start), False, maxiter))
            continue
        if not domain.contains(root.w, slack=1e-12):
            continue
        if any(abs(root.w - kept.w) <= spacing for kept in roots):
            continue
        roots.append(root)

    for candidate in failed:
        if all(abs(candidate.w - kept.w) > spacing for kept in roots):
            roots.append(candidate)

    roots.sort(key=lambda r: (r.w.real, r.w.imag))
    return roots
