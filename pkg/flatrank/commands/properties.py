import argparse
import logging
from pathlib import Path

from flatrank.commands.dependencies import exit_code
from flatrank.config import get_settings
from flatrank.services import report_service
from flatrank.services.property_service import DEFAULT_INSTANCES, run_property_suites

logger = logging.getLogger(__name__)


def run_properties(args: argparse.Namespace) -> int:
    seed = get_settings().default_seed if args.seed is None else args.seed
    checks = run_property_suites(args.instances, seed)
    document = report_service.build_document(
        "properties", {"instances": args.instances, "seed": seed}, checks=checks, seed=seed
    )
    for line in report_service.summarize(document):
        logger.info(line)
    report_service.write_document(document, args.out)
    return exit_code(document.passed)


def register(subparsers: argparse._SubParsersAction) -> None:
    properties = subparsers.add_parser("properties", help="Run the randomized property suites")
    properties.add_argument("--instances", type=int, default=DEFAULT_INSTANCES)
    properties.add_argument("--seed", type=int, default=None)
    properties.add_argument("--out", type=Path, default=None)
    properties.set_defaults(handler=run_properties)
