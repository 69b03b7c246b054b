import argparse
import logging
import sys

from flatrank import __version__
from flatrank.commands import properties, tensors, verify
from flatrank.commands.dependencies import EXIT_ERROR
from flatrank.config import get_settings
from flatrank.errors import FlatrankError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flatrank",
        description="Exact Koszul flattening ranks for Coppersmith-Winograd tensors",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Overrides FLATRANK_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)
    verify.register(subparsers)
    tensors.register(subparsers)
    properties.register(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Entry point of the flatrank console script; returns the process exit code."""
    args = build_parser().parse_args(argv)
    settings = get_settings()

    # Configure logging
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    try:
        return args.handler(args)
    except FlatrankError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
