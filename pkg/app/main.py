"""
theta-surfaces - spacelike minimal surfaces of the theta-family in R^4_1
Command-line entry point
"""
import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path

from app import config as settings
from app.commands import check, examples, pair, planar, sample
from app.errors import ThetaSurfaceError, exit_code_for

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s | %(levelname)-8s | %(name)s | %(message)s'
DATE_FORMAT = '%H:%M:%S'


def configure_logging(level: str = "INFO", log_dir: str | None = None) -> None:
    """Log to stderr (stdout carries command output) and optionally to a daily file."""
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_dir:
        Path(log_dir).mkdir(parents=True, exist_ok=True)
        log_file = Path(log_dir) / f"theta_{datetime.now().strftime('%Y%m%d')}.log"
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(
        level=level.upper(),
        format=LOG_FORMAT,
        datefmt=DATE_FORMAT,
        handlers=handlers,
        force=True
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="theta-surfaces",
        description="Construct, sample and validate theta-families of spacelike minimal surfaces",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (sample, check, planar, pair, examples):
        command.register(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging("DEBUG" if args.verbose else settings.LOG_LEVEL, settings.LOG_DIR)

    try:
        return args.handler(args)
    except ThetaSurfaceError as e:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
