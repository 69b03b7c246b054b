"""
Shared helpers for the command modules.
"""

import argparse
import sys

# Exit codes
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2


def q_range(text: str) -> list[int]:
    """argparse type for '--q A..B' (inclusive) or a single value."""
    start, sep, stop = text.partition("..")
    try:
        low = int(start)
        high = int(stop) if sep else low
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected A..B or a single integer, got {text!r}") from e
    if high < low:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(low, high + 1))


def read_stdin() -> str:
    return sys.stdin.read()


def write_stdout(text: str) -> None:
    sys.stdout.write(text)


def exit_code(passed: bool) -> int:
    return EXIT_OK if passed else EXIT_CHECK_FAILED
