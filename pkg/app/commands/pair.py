import argparse
import logging
import math
import time

from app.commands import parse_grid
from app.config import load_source, resolve_jobs
from app.errors import EXIT_CHECK_FAILED, EXIT_OK, GridMismatch, InvalidDomain
from app.services import association
from app.services.surface import validate_regularity

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("pair", help="test the associated equations between two surfaces")
    parser.add_argument("source_x", metavar="SOURCE_X", help="example id or TOML file for X")
    parser.add_argument("source_y", metavar="SOURCE_Y", help="example id or TOML file for Y")
    parser.add_argument("--theta-x", type=float, default=0.0, metavar="R", help="member of X (default 0)")
    parser.add_argument("--theta-y", type=float, default=math.pi, metavar="R", help="member of Y (default pi)")
    parser.add_argument("--grid", metavar="NxN", help="probe lattice, e.g. 5x5")
    parser.add_argument("--h", type=float, metavar="R", help="finite-difference step")
    parser.add_argument("--jobs", type=int, metavar="N", help="worker threads (0 = all cores)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    x = load_source(args.source_x)
    y = load_source(args.source_y)

    if args.h is None and x.h != y.h:
        raise GridMismatch(f"finite-difference steps differ: {x.h} vs {y.h}")
    if args.grid is None and x.pair_lattice != y.pair_lattice:
        raise GridMismatch(f"probe lattices differ: {x.pair_lattice} vs {y.pair_lattice}")
    h = args.h if args.h is not None else x.h
    lattice = x.pair_lattice
    if args.grid:
        nu, nv = parse_grid(args.grid)
        if nu != nv:
            raise GridMismatch(f"probe lattice must be square, got {nu}x{nv}")
        lattice = nu

    sd_x = x.to_surface_data()
    sd_y = y.to_surface_data()
    try:
        common = sd_x.domain.intersection(sd_y.domain)
    except InvalidDomain as err:
        raise GridMismatch(f"domains of {x.name} and {y.name} do not overlap") from err
    validate_regularity(sd_x, n=x.probe_grid, eps=x.tolerances.regularity)
    validate_regularity(sd_y, n=y.probe_grid, eps=y.tolerances.regularity)

    started = time.time()
    logger.info(f"Pair {x.name}(theta={args.theta_x:.6g}) vs {y.name}(theta={args.theta_y:.6g}) on {common.bounds}")
    tol = min(x.tolerances.pair, y.tolerances.pair)
    report = association.pair_check_patches(
        sd_x, sd_y,
        theta_x=args.theta_x, theta_y=args.theta_y,
        h=h, lattice=lattice, domain=common, tol=tol,
        jobs=resolve_jobs(args.jobs), quadrature=x.tolerances.quadrature_settings(),
    )
    logger.info(f"Done in {time.time() - started:.1f}s")

    labels = ("Y3_w - X0_w", "Y1_w + i X2_w", "Y2_w - i X1_w")
    for label, residual in zip(labels, report.max_residuals):
        print(f"{label:<15} {residual:.3e}")
    print(f"h = {report.grid_spacing:.1e}, tolerance {report.tolerance:.1e}")
    print(f"verdict: {'associated' if report.verdict else 'not associated'}")
    return EXIT_OK if report.verdict else EXIT_CHECK_FAILED
