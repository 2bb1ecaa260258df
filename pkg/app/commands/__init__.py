"""
CLI subcommands. Each module exposes ``register(subparsers)``; the handler it
installs takes the parsed arguments and returns an exit code.
"""
import argparse
import logging
import re
from pathlib import Path

from app import config as settings
from app.config import ScenarioConfig, load_config, load_example
from app.errors import ConfigError

logger = logging.getLogger(__name__)

_GRID_RE = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")


def parse_grid(text: str) -> tuple[int, int]:
    match = _GRID_RE.match(text)
    if match is None:
        raise ConfigError(f"--grid expects NUxNV, got {text!r}")
    nu, nv = int(match.group(1)), int(match.group(2))
    if nu < 2 or nv < 2:
        raise ConfigError(f"grid must be at least 2x2, got {nu}x{nv}")
    return nu, nv


def add_source_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", metavar="PATH", help="scenario TOML file")
    source.add_argument("--example", metavar="ID", help="built-in example (see 'examples list')")


def add_run_arguments(parser: argparse.ArgumentParser, theta: bool = True) -> None:
    if theta:
        parser.add_argument("--theta", type=float, metavar="R", help="family parameter in radians")
    parser.add_argument("--grid", metavar="NUxNV", help="sampling grid, e.g. 17x17")
    parser.add_argument("--out", metavar="DIR", help=f"output directory (default: {settings.OUT_DIR})")
    parser.add_argument("--h", type=float, metavar="R", help="finite-difference step")
    parser.add_argument("--jobs", type=int, metavar="N", help="worker threads (0 = all cores)")


def resolve_scenario(args: argparse.Namespace) -> ScenarioConfig:
    """Load the scenario named on the command line and apply flag overrides."""
    scenario = load_example(args.example) if args.example else load_config(args.config)
    return apply_overrides(scenario, args)


def apply_overrides(scenario: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    updates = {}
    if getattr(args, "theta", None) is not None:
        updates["thetas"] = [args.theta]
    if getattr(args, "grid", None):
        updates["grid"] = parse_grid(args.grid)
    if getattr(args, "h", None) is not None:
        if not 0 < args.h < 0.1:
            raise ConfigError(f"--h must lie in (0, 0.1), got {args.h}")
        updates["h"] = args.h
    if updates:
        logger.debug(f"Overrides: {updates}")
        scenario = scenario.model_copy(update=updates)
    return scenario


def output_dir(args: argparse.Namespace) -> Path:
    return Path(getattr(args, "out", None) or settings.OUT_DIR)


def theta_tag(theta: float) -> str:
    return f"theta{theta:.6f}".replace("-", "m")
