import argparse

from app.config import example_ids, load_example
from app.errors import EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser("examples", help="built-in example scenarios")
    parser.add_argument("action", choices=["list"])
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    for example_id in example_ids():
        scenario = load_example(example_id)
        u_min, u_max, v_min, v_max = scenario.domain
        print(f"{example_id}  a = {scenario.a_expr}  mu = {scenario.mu_expr}  "
              f"u in [{u_min}, {u_max}], v in [{v_min}, {v_max}]")
    return EXIT_OK
