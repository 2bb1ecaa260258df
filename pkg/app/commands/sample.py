import argparse
import logging
import time

from app.commands import add_run_arguments, add_source_arguments, output_dir, resolve_scenario, theta_tag
from app.config import resolve_jobs
from app.errors import EXIT_OK
from app.services import export, geometry
from app.services.surface import validate_regularity
from app.services.weierstrass import sample_grid

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("sample", help="sample one member of the family, write OBJ + CSV")
    add_source_arguments(parser)
    add_run_arguments(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args)
    tol = scenario.tolerances
    theta = scenario.thetas[0]
    nu, nv = scenario.grid
    jobs = resolve_jobs(args.jobs)
    out = output_dir(args)
    total_start = time.time()

    logger.info("=" * 60)
    logger.info(f"SAMPLE {scenario.name} - theta={theta:.6g}, grid {nu}x{nv}")
    logger.info("=" * 60)

    step_start = time.time()
    logger.info("[STEP 1/3] Validating regularity...")
    sd = scenario.to_surface_data()
    validate_regularity(sd, n=scenario.probe_grid, eps=tol.regularity)
    logger.info(f"           Done in {time.time() - step_start:.1f}s")

    step_start = time.time()
    logger.info(f"[STEP 2/3] Integrating with {jobs} worker(s)...")
    surface = sample_grid(sd, theta, nu, nv, jobs=jobs, quadrature=tol.quadrature_settings())
    curvature = geometry.curvature_field(sd, theta, surface.w, h=scenario.h, planar_tol=tol.planar)
    logger.info(f"           Done in {time.time() - step_start:.1f}s")

    step_start = time.time()
    logger.info("[STEP 3/3] Writing files...")
    stem = f"{scenario.name}_{theta_tag(theta)}"
    written = []
    for request in scenario.outputs:
        if request.kind == "obj":
            written.append(export.write_obj(surface, out / f"{stem}.obj", request.projection))
        elif request.kind == "csv":
            written.append(export.write_csv(surface, curvature, out / f"{stem}.csv"))
    logger.info(f"           Done in {time.time() - step_start:.1f}s")

    logger.info("=" * 60)
    logger.info(f"SAMPLE COMPLETED in {time.time() - total_start:.1f}s")
    logger.info("=" * 60)
    for path in written:
        print(path)
    return EXIT_OK
