"""
check: run every validation suite on a scenario and write a JSON-lines report.
"""
import argparse
import logging
import time

import numpy as np

from app.commands import add_run_arguments, add_source_arguments, output_dir, resolve_scenario, theta_tag
from app.config import ScenarioConfig, resolve_jobs
from app.errors import EXIT_CHECK_FAILED, EXIT_OK
from app.services import association, export, geometry
from app.services.export import CheckResult
from app.services.minkowski import lorentz_dot
from app.services.surface import SurfaceData, validate_regularity
from app.services.weierstrass import integrate_complex, integrate_path, sample_grid

logger = logging.getLogger(__name__)

# tau^3 and nu^0 are built as exact zeros
FRAME_ZERO_TOL = 1e-15
PATH_PROBES = 20
PROBE_SEED = 20240531


def register(subparsers) -> None:
    parser = subparsers.add_parser("check", help="validate a scenario against every invariant")
    add_source_arguments(parser)
    add_run_arguments(parser)
    parser.set_defaults(handler=run)


def _worst(values: np.ndarray, nodes: np.ndarray, largest: bool = True) -> tuple[float, complex]:
    values = np.asarray(values, dtype=float)
    index = np.nanargmax(values) if largest else np.nanargmin(values)
    index = np.unravel_index(index, values.shape)
    return float(values[index]), complex(nodes[index])


def _below(name, values, nodes, tolerance, theta) -> CheckResult:
    worst, node = _worst(values, nodes)
    return CheckResult(name, worst, tolerance, worst < tolerance, node, theta)


def probe_pairs(sd: SurfaceData, count: int, seed: int = PROBE_SEED) -> tuple[np.ndarray, np.ndarray]:
    """Seeded probe pairs (w, w') in the domain, the same on every run."""
    rng = np.random.default_rng(seed)
    d = sd.domain
    u = rng.uniform(d.u_min, d.u_max, (2, count))
    v = rng.uniform(d.v_min, d.v_max, (2, count))
    return u[0] + 1j * v[0], u[1] + 1j * v[1]


def check_theta(sd: SurfaceData, scenario: ScenarioConfig, theta: float, jobs: int) -> list[CheckResult]:
    tol = scenario.tolerances
    quadrature = tol.quadrature_settings()
    nu, nv = scenario.grid
    surface = sample_grid(sd, theta, nu, nv, jobs=jobs, quadrature=quadrature)
    nodes = surface.w
    results = [
        _below("monge_null", surface.monge_null, nodes, tol.monge_null, theta),
        _below("monge_metric", surface.monge_metric / (1.0 + surface.lambda2), nodes, tol.monge_metric, theta),
    ]

    fr = geometry.FrameAtPoint(surface.tau, surface.nu, surface.e1, surface.e2, surface.lambda2)
    results.append(_below("frame", geometry.frame_defect(fr), nodes, tol.frame, theta))
    zeros = np.maximum(np.abs(surface.tau[..., 3]), np.abs(surface.nu[..., 0]))
    worst, node = _worst(zeros, nodes)
    results.append(CheckResult("frame_exact_zeros", worst, FRAME_ZERO_TOL, worst < FRAME_ZERO_TOL, node, theta))
    L3, L0 = geometry.lightlike_normals(sd.a(nodes), theta)
    nullity = np.maximum(
        np.abs(lorentz_dot(L3, L3)) / L3[..., 0] ** 2,
        np.abs(lorentz_dot(L0, L0)) / L0[..., 0] ** 2,
    )
    results.append(_below("lightlike_normals", nullity, nodes, tol.lightlike, theta))

    curvature = geometry.curvature_field(sd, theta, nodes, h=scenario.h, planar_tol=tol.planar)
    results.append(_below("curvature", curvature.relative_error, nodes, tol.curvature, theta))
    if geometry.is_maximal_slice(theta):
        worst, node = _worst(curvature.k_closed, nodes, largest=False)
        results.append(CheckResult("curvature_sign", worst, tol.sign, worst >= -tol.sign, node, theta))
    elif geometry.is_euclidean_slice(theta):
        worst, node = _worst(curvature.k_closed, nodes)
        results.append(CheckResult("curvature_sign", worst, tol.sign, worst <= tol.sign, node, theta))

    w_end, w_mid = probe_pairs(sd, PATH_PROBES)
    gaps = np.array([
        np.max(np.abs(integrate_complex(sd, theta, end, quadrature)
                      - integrate_path(sd, theta, [sd.w0, mid, end], quadrature)))
        for end, mid in zip(w_end, w_mid)
    ])
    results.append(_below("path_independence", 2.0 * gaps, w_end, tol.path, theta))

    interior = nodes[1:-1, 1:-1]
    if geometry.is_maximal_slice(theta) or geometry.is_euclidean_slice(theta):
        report = geometry.weingarten_check(sd, theta, interior, h=scenario.h)
        results.append(CheckResult(
            "weingarten", report.max_residual, tol.weingarten,
            report.max_residual < tol.weingarten, report.worst_node, theta,
        ))
    if geometry.is_maximal_slice(theta):
        height = geometry.phi_map(surface.tau, tol=tol.hyperbolic)[..., 3]
        worst, node = _worst(height, nodes)
        results.append(CheckResult("gauss_image_hemisphere", worst, 0.0, worst < 0.0, node, theta))
        eta = np.asarray(geometry.weingarten(sd, nodes).eta)
        gap = np.abs(np.abs(eta) ** 2 - curvature.k_closed) / (1.0 + np.abs(curvature.k_closed))
        results.append(_below("gauss_map_conformal", gap, nodes, tol.curvature, theta))
    return results


def check_planar(sd: SurfaceData, scenario: ScenarioConfig) -> tuple[list[CheckResult], list[str]]:
    tol = scenario.tolerances
    notes = []
    flatness = geometry.flatness_classify(sd, sd.domain.grid(*scenario.grid), tol=tol.planar)
    if flatness.kind is geometry.Flatness.FULLY_PLANAR:
        notes.append("fully_planar, K ≡ 0")
    else:
        notes.append(f"has_nonplanar_point (max |a'| = {flatness.max_abs_a_prime:.3e})")
    results = [CheckResult("flatness", flatness.max_abs_a_prime, tol.planar, True)]

    grid = (scenario.probe_grid, scenario.probe_grid)
    kind, roots = association.planar_discreteness_scan(
        sd, scenario.scan(), grid, tol=tol.planar, maxiter=tol.newton_maxiter
    )
    notes.append(f"planar points: {kind.value}")
    for root in roots:
        notes.append(f"  w = {root.w.real:.10f} {root.w.imag:+.10f}i  |a'| = {root.modulus:.2e}")
    worst = max((root.modulus for root in roots), default=0.0)
    results.append(CheckResult("planar_points", worst, tol.planar, worst < tol.planar))
    return results, notes


def run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args)
    tol = scenario.tolerances
    jobs = resolve_jobs(args.jobs)
    thetas = scenario.thetas
    steps = len(thetas) + 3
    total_start = time.time()

    logger.info("=" * 60)
    logger.info(f"CHECK {scenario.name} - {len(thetas)} theta value(s), grid {scenario.grid[0]}x{scenario.grid[1]}")
    logger.info("=" * 60)

    step_start = time.time()
    logger.info(f"[STEP 1/{steps}] Validating regularity...")
    sd = scenario.to_surface_data()
    validate_regularity(sd, n=scenario.probe_grid, eps=tol.regularity)
    logger.info(f"           Done in {time.time() - step_start:.1f}s")

    results: list[CheckResult] = []
    for index, theta in enumerate(thetas, start=2):
        step_start = time.time()
        logger.info(f"[STEP {index}/{steps}] Checking theta={theta:.6g}...")
        results.extend(check_theta(sd, scenario, theta, jobs))
        logger.info(f"           Done in {time.time() - step_start:.1f}s")

    step_start = time.time()
    logger.info(f"[STEP {steps}/{steps}] Planar points and associated pair...")
    planar_results, notes = check_planar(sd, scenario)
    results.extend(planar_results)
    pair = association.pair_check_patches(
        sd, sd, h=scenario.h, lattice=scenario.pair_lattice, tol=tol.pair, jobs=jobs,
        quadrature=tol.quadrature_settings(),
    )
    results.append(CheckResult("pair_association", pair.worst, tol.pair, pair.verdict))
    graph = association.graph_admissibility(sd, sd.domain.grid(*scenario.grid), tol=tol.graph)
    notes.append(
        f"graph chart: {'admissible' if graph.admissible else 'not admissible'} "
        f"(min |Im a| = {graph.min_abs_im_a:.3e})"
    )
    logger.info(f"           Done in {time.time() - step_start:.1f}s")

    report_path = export.write_report(results, output_dir(args) / f"{scenario.name}_check.jsonl")

    for result in results:
        status = "PASS" if result.passed else "FAIL"
        where = "" if result.theta is None else f" [{theta_tag(result.theta)}]"
        line = f"{status}  {result.check}{where}: worst {result.worst_value:.3e} (tol {result.tolerance:.1e})"
        if not result.passed and result.worst_node is not None:
            line += f" at w = {result.worst_node.real:.6f} {result.worst_node.imag:+.6f}i"
        print(line)
    for note in notes:
        print(note)
    print(f"report: {report_path}")

    failed = [r for r in results if not r.passed]
    logger.info("=" * 60)
    logger.info(f"CHECK COMPLETED in {time.time() - total_start:.1f}s - {len(results) - len(failed)}/{len(results)} passed")
    logger.info("=" * 60)
    return EXIT_CHECK_FAILED if failed else EXIT_OK
