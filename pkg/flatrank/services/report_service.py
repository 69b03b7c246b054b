"""Report documents: one JSON document per invocation plus an optional CSV."""

import csv
import io
import logging
from pathlib import Path
from typing import Any

from flatrank.schemas import CheckOutcome, Environment, FlatteningReport, ReportDocument

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "subject",
    "m",
    "q",
    "n",
    "variant",
    "rows",
    "cols",
    "rank",
    "expected_rank",
    "lo_bound",
    "passed",
    "primes",
    "seed",
    "wall_time",
)


def build_document(
    command: str,
    params: dict[str, Any],
    reports: list[FlatteningReport] | None = None,
    checks: list[CheckOutcome] | None = None,
    seed: int | None = None,
) -> ReportDocument:
    reports = reports or []
    primes = sorted({p for report in reports for p in report.primes})
    return ReportDocument(
        command=command,
        params=params,
        reports=reports,
        checks=checks or [],
        environment=Environment(primes=primes, seed=seed),
    )


def to_json(document: ReportDocument) -> str:
    """Deterministic apart from wall_time."""
    return document.model_dump_json(indent=2)


def csv_row(report: FlatteningReport) -> dict[str, Any]:
    return {
        "subject": report.subject,
        "m": report.m,
        "q": report.q,
        "n": report.n,
        "variant": report.variant,
        "rows": report.rows,
        "cols": report.cols,
        "rank": report.rank.rank,
        "expected_rank": report.expected_rank,
        "lo_bound": report.lo_bound,
        "passed": report.passed,
        "primes": ";".join(str(p) for p in report.primes),
        "seed": report.seed,
        "wall_time": f"{report.wall_time:.3f}",
    }


def to_csv(reports: list[FlatteningReport]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for report in sorted(reports, key=lambda r: (r.m or 0, r.q or 0, r.n or 0)):
        writer.writerow(csv_row(report))
    return buffer.getvalue()


def write_document(document: ReportDocument, path: Path | None) -> None:
    """Write to path, or print to stdout when path is None."""
    payload = to_json(document)
    if path is None:
        print(payload)
        return
    path.write_text(payload + "\n")
    logger.info(f"Report written to {path}")


def write_csv(reports: list[FlatteningReport], path: Path) -> None:
    path.write_text(to_csv(reports))
    logger.info(f"CSV with {len(reports)} rows written to {path}")


def summarize(document: ReportDocument) -> list[str]:
    """Human-readable lines: one per report and one per failed check."""
    lines = []
    for report in document.reports:
        subject = f"n={report.n} p={report.p}" if report.subject == "matmul" else f"m={report.m} q={report.q}"
        status = "PASS" if report.passed else "FAIL"
        lines.append(
            f"[{status}] {subject} {report.variant}: {report.rows}x{report.cols} rank {report.rank.rank}"
            + (f" (expected {report.expected_rank})" if report.expected_rank is not None else "")
            + f", lo_bound {report.lo_bound}"
        )
        for check in report.checks:
            if not check.passed:
                marker = "failed" if check.asserted else "recorded"
                lines.append(f"    {marker} {check.name}: expected {check.expected}, observed {check.observed}")
    for check in document.checks:
        marker = "ok" if check.passed else ("FAILED" if check.asserted else "recorded")
        counts = f" {check.observed}/{check.expected}" if check.expected is not None else ""
        lines.append(f"[{marker}] {check.name}:{counts} {check.detail}".rstrip())
    return lines
