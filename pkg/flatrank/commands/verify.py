"""
verify / explore / bound commands.
"""

import argparse
import asyncio
import logging
from pathlib import Path

from flatrank.commands.dependencies import exit_code, q_range
from flatrank.config import get_settings
from flatrank.services import report_service
from flatrank.services.verify_service import (
    bound_matmul,
    explore_power,
    verify_cube,
    verify_many,
    verify_square,
)

logger = logging.getLogger(__name__)


def _publish(document, out: Path | None, csv_path: Path | None = None) -> int:
    for line in report_service.summarize(document):
        logger.info(line)
    report_service.write_document(document, out)
    if csv_path is not None:
        report_service.write_csv(document.reports, csv_path)
    return exit_code(document.passed)


def run_verify(args: argparse.Namespace) -> int:
    options = {"exact": args.exact, "prime": args.prime}
    if args.parallel > 1:
        reports = asyncio.run(verify_many(args.q, args.m, args.parallel, **options))
    elif args.m == 2:
        reports = verify_square(args.q, **options)
    else:
        reports = verify_cube(args.q, **options)

    params = {"m": args.m, "q": args.q, "exact": args.exact, "prime": args.prime, "parallel": args.parallel}
    document = report_service.build_document("verify", params, reports=reports)
    return _publish(document, args.out, args.csv)


def run_explore(args: argparse.Namespace) -> int:
    reports = explore_power(args.q, args.m, args.prime)
    params = {"m": args.m, "q": args.q, "prime": args.prime}
    document = report_service.build_document("explore", params, reports=reports)
    return _publish(document, args.out, args.csv)


def run_bound_matmul(args: argparse.Namespace) -> int:
    seed = get_settings().default_seed if args.seed is None else args.seed
    report = bound_matmul(args.n, args.p, args.trials, seed, args.prime)
    logger.info(f"Lower bound on the border rank of M_<{args.n}>: {report.lo_bound}")
    params = {"n": args.n, "p": args.p, "trials": args.trials, "seed": seed, "prime": args.prime}
    document = report_service.build_document("bound matmul", params, reports=[report], seed=seed)
    return _publish(document, args.out)


def register(subparsers: argparse._SubParsersAction) -> None:
    verify = subparsers.add_parser("verify", help="Check the restricted flattening ranks for m=2 or m=3")
    verify.add_argument("--m", type=int, choices=(2, 3), required=True)
    verify.add_argument("--q", type=q_range, required=True, help="Inclusive range A..B")
    verify.add_argument("--exact", action="store_true", help="Rational ranks by fraction-free elimination")
    verify.add_argument("--prime", type=int, default=None)
    verify.add_argument("--out", type=Path, default=None, help="Report JSON path (stdout if omitted)")
    verify.add_argument("--csv", type=Path, default=None)
    verify.add_argument("--parallel", type=int, default=1, help="Worker threads for independent q")
    verify.set_defaults(handler=run_verify)

    explore = subparsers.add_parser("explore", help="Report-only ranks for any m >= 2")
    explore.add_argument("--m", type=int, required=True)
    explore.add_argument("--q", type=q_range, required=True)
    explore.add_argument("--prime", type=int, default=None)
    explore.add_argument("--out", type=Path, default=None)
    explore.add_argument("--csv", type=Path, default=None)
    explore.set_defaults(handler=run_explore)

    bound = subparsers.add_parser("bound", help="Koszul lower bounds by random restriction")
    targets = bound.add_subparsers(dest="target", required=True)
    matmul = targets.add_parser("matmul", help="Matrix multiplication tensor M_<n>")
    matmul.add_argument("--n", type=int, required=True)
    matmul.add_argument("--p", type=int, default=1)
    matmul.add_argument("--trials", type=int, default=10)
    matmul.add_argument("--seed", type=int, default=None)
    matmul.add_argument("--prime", type=int, default=None)
    matmul.add_argument("--out", type=Path, default=None)
    matmul.set_defaults(handler=run_bound_matmul)
