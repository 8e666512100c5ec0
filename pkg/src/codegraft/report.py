"""Mining reports: canonical JSON serialization and CSV table export.

The JSON layout is documented in docs/report-schema.md. Serialization is
canonical (sorted keys, two-space indent, trailing newline) so that
serialize -> parse -> serialize is byte-identical.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .classify import Category, CategoryTally
from .organs import (
    ContentValue,
    LabelTally,
    OrganCandidate,
    UnpracticalReason,
    tally_labels,
)


@dataclass(frozen=True)
class CandidateSummary:
    commit_id: str
    summary: str
    practical: bool
    unpractical_reason: int | None
    content: str | None
    other_reason: str | None
    easy: bool | None
    unresolved: tuple[str, ...]
    block_count: int
    added_lines: int


def summarize_candidate(candidate: OrganCandidate) -> CandidateSummary:
    practicality = candidate.practicality
    content = candidate.content
    transplantability = candidate.transplantability
    return CandidateSummary(
        commit_id=candidate.commit.id,
        summary=candidate.commit.summary,
        practical=practicality.practical,
        unpractical_reason=int(practicality.reason) if practicality.reason else None,
        content=content.value.value if content else None,
        other_reason=content.other_reason.value if content and content.other_reason else None,
        easy=transplantability.easy if transplantability else None,
        unresolved=tuple(sorted(transplantability.unresolved)) if transplantability else (),
        block_count=len(candidate.blocks),
        added_lines=sum(len(block.lines) for block in candidate.blocks),
    )


@dataclass(frozen=True)
class MiningReport:
    repo_path: str
    head: str
    cutoff: str | None
    generated_at: str
    tool_version: str
    tally: CategoryTally
    label_tally: LabelTally
    candidates: tuple[CandidateSummary, ...]


def build_report(
    repo_path: str,
    head: str,
    cutoff: str | None,
    generated_at: str,
    tally: CategoryTally,
    candidates: Sequence[OrganCandidate],
) -> MiningReport:
    return MiningReport(
        repo_path=repo_path,
        head=head,
        cutoff=cutoff,
        generated_at=generated_at,
        tool_version=__version__,
        tally=tally,
        label_tally=tally_labels(candidates),
        candidates=tuple(summarize_candidate(c) for c in candidates),
    )


def report_to_dict(report: MiningReport) -> dict:
    tally = report.tally
    labels = report.label_tally
    return {
        "schema": "codegraft.mining-report.v1",
        "repo": {
            "path": report.repo_path,
            "head": report.head,
            "cutoff": report.cutoff,
        },
        "generated_at": report.generated_at,
        "tool_version": report.tool_version,
        "categories": {
            "total_commits": tally.total_commits,
            "counts": {c.value: tally.count(c) for c in Category},
            "shares": {c.value: tally.share(c) for c in Category},
        },
        "labels": {
            "adding_total": labels.adding_total,
            "practical": labels.practical,
            "unpractical": labels.unpractical,
            "unpractical_reasons": {
                str(int(r)): labels.unpractical_reasons.get(r, 0) for r in UnpracticalReason
            },
            "content": {v.value: labels.content_counts.get(v, 0) for v in ContentValue},
            "easy": labels.easy,
            "difficult": labels.difficult,
        },
        "candidates": [
            {
                "commit": c.commit_id,
                "summary": c.summary,
                "practical": c.practical,
                "unpractical_reason": c.unpractical_reason,
                "content": c.content,
                "other_reason": c.other_reason,
                "easy": c.easy,
                "unresolved": list(c.unresolved),
                "blocks": c.block_count,
                "added_lines": c.added_lines,
            }
            for c in report.candidates
        ],
    }


def report_from_dict(data: dict) -> MiningReport:
    categories = data["categories"]
    labels = data["labels"]
    tally = CategoryTally(
        counts={Category(name): count for name, count in categories["counts"].items()},
        total_commits=categories["total_commits"],
    )
    label_tally = LabelTally(
        adding_total=labels["adding_total"],
        practical=labels["practical"],
        unpractical=labels["unpractical"],
        unpractical_reasons={
            UnpracticalReason(int(k)): v for k, v in labels["unpractical_reasons"].items()
        },
        content_counts={ContentValue(k): v for k, v in labels["content"].items()},
        easy=labels["easy"],
        difficult=labels["difficult"],
    )
    candidates = tuple(
        CandidateSummary(
            commit_id=c["commit"],
            summary=c["summary"],
            practical=c["practical"],
            unpractical_reason=c["unpractical_reason"],
            content=c["content"],
            other_reason=c["other_reason"],
            easy=c["easy"],
            unresolved=tuple(c["unresolved"]),
            block_count=c["blocks"],
            added_lines=c["added_lines"],
        )
        for c in data["candidates"]
    )
    return MiningReport(
        repo_path=data["repo"]["path"],
        head=data["repo"]["head"],
        cutoff=data["repo"]["cutoff"],
        generated_at=data["generated_at"],
        tool_version=data["tool_version"],
        tally=tally,
        label_tally=label_tally,
        candidates=candidates,
    )


def canonical_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def verify_consistency(report: MiningReport) -> list[str]:
    """Recount the stored tallies against the candidate list."""
    problems: list[str] = []
    labels = report.label_tally
    stored = (
        labels.adding_total,
        labels.practical,
        labels.easy,
        dict(labels.content_counts),
    )
    adding = len(report.candidates)
    practical = sum(1 for c in report.candidates if c.practical)
    easy = sum(1 for c in report.candidates if c.easy)
    contents: dict[ContentValue, int] = {v: 0 for v in ContentValue}
    for c in report.candidates:
        if c.content:
            contents[ContentValue(c.content)] += 1
    if stored != (adding, practical, easy, contents):
        problems.append("label tallies disagree with the candidate list")
    if labels.practical + labels.unpractical != labels.adding_total:
        problems.append("practical + unpractical != adding_total")
    if labels.easy + labels.difficult != labels.practical:
        problems.append("easy + difficult != practical")
    if sum(labels.content_counts.values()) != labels.practical:
        problems.append("content kinds do not sum to practical")
    return problems


_PERCENT = "{:.2f}"


def category_csv_rows(tally: CategoryTally) -> list[list[str]]:
    """Rows shaped like the per-category occurrence table."""
    header = ["corpus", *[c.value for c in Category], "total_commits"]
    counts = ["counts", *[str(tally.count(c)) for c in Category], str(tally.total_commits)]
    shares = [
        "percent",
        *[_PERCENT.format(100 * tally.share(c)) for c in Category],
        "",
    ]
    return [header, counts, shares]


def practicality_csv_rows(labels: LabelTally) -> list[list[str]]:
    header = ["corpus", "practical_adding", "unpractical_adding", "total_adding"]
    counts = ["counts", str(labels.practical), str(labels.unpractical), str(labels.adding_total)]
    share = labels.share
    shares = [
        "percent",
        _PERCENT.format(100 * share(labels.practical, labels.adding_total)),
        _PERCENT.format(100 * share(labels.unpractical, labels.adding_total)),
        "100.00" if labels.adding_total else "0.00",
    ]
    return [header, counts, shares]


def content_csv_rows(labels: LabelTally) -> list[list[str]]:
    order = [
        ContentValue.SIMPLE_ADDING,
        ContentValue.ADDING_FUNCTION,
        ContentValue.ADDING_CLASS,
        ContentValue.OTHER,
    ]
    header = ["corpus", *[v.value for v in order], "total_practical"]
    counts = [
        "counts",
        *[str(labels.content_counts.get(v, 0)) for v in order],
        str(labels.practical),
    ]
    shares = [
        "percent",
        *[
            _PERCENT.format(100 * labels.share(labels.content_counts.get(v, 0), labels.practical))
            for v in order
        ],
        "100.00" if labels.practical else "0.00",
    ]
    return [header, counts, shares]


def transplant_csv_rows(labels: LabelTally) -> list[list[str]]:
    header = ["corpus", "easy_to_transplant", "difficult_to_transplant", "total_practical"]
    counts = ["counts", str(labels.easy), str(labels.difficult), str(labels.practical)]
    shares = [
        "percent",
        _PERCENT.format(100 * labels.share(labels.easy, labels.practical)),
        _PERCENT.format(100 * labels.share(labels.difficult, labels.practical)),
        "100.00" if labels.practical else "0.00",
    ]
    return [header, counts, shares]


def write_csv_tables(report: MiningReport, directory: str | Path) -> list[Path]:
    """Write the four tally tables as CSV files; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    tables = {
        "categories.csv": category_csv_rows(report.tally),
        "practicality.csv": practicality_csv_rows(report.label_tally),
        "content_kinds.csv": content_csv_rows(report.label_tally),
        "transplantability.csv": transplant_csv_rows(report.label_tally),
    }
    written: list[Path] = []
    for name, rows in tables.items():
        path = directory / name
        with path.open("w", newline="", encoding="utf-8") as handle:
            csv.writer(handle).writerows(rows)
        written.append(path)
    return written
