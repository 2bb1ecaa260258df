import argparse
import logging

from app.commands import add_source_arguments, parse_grid
from app.config import load_config, load_example
from app.errors import EXIT_OK
from app.services import association

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("planar", help="list planar points (zeros of a')")
    add_source_arguments(parser)
    parser.add_argument("--grid", metavar="NUxNV", help="scan grid (default: probe grid of the scenario)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    scenario = load_example(args.example) if args.example else load_config(args.config)
    grid = parse_grid(args.grid) if args.grid else (scenario.probe_grid, scenario.probe_grid)
    tol = scenario.tolerances
    domain = scenario.scan()

    sd = scenario.to_surface_data()
    logger.info(f"Scanning a' on {domain.bounds} with a {grid[0]}x{grid[1]} grid")
    kind, roots = association.planar_discreteness_scan(sd, domain, grid, tol=tol.planar, maxiter=tol.newton_maxiter)

    if kind is association.Discreteness.EVERYWHERE and not roots:
        print("a' vanishes on the whole scan domain: every point is planar")
        return EXIT_OK
    if not roots:
        print("no planar points")
        return EXIT_OK
    for root in roots:
        print(f"w = {root.w.real:.10f} {root.w.imag:+.10f}i  |a'| = {root.modulus:.2e}")
    print(f"zero set: {kind.value}")
    return EXIT_OK
