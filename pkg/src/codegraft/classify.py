"""Keyword classification of commit comments into eight categories.

Matching is purely lexical: a category applies when one of its keyword
stems appears as a whole word, case-insensitively. A comment can match
several categories at once (multi-keyword comments count once per matched
category); `other` applies only when nothing matches. Negations ("do not
add") still match — a known imprecision of keyword tallies.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .ingest import CommitRecord


class Category(enum.Enum):
    UPDATE = "update"
    FIX_CORRECT = "fix_correct"
    ADD = "add"
    DELETE_REMOVE = "delete_remove"
    MODIFY_CHANGE = "modify_change"
    MERGE = "merge"
    CREATE = "create"
    OTHER = "other"


KEYWORD_CATEGORIES: tuple[Category, ...] = tuple(c for c in Category if c is not Category.OTHER)

# Bare keywords plus their common inflections, matched on word boundaries
# ("address" must not hit "add").
DEFAULT_KEYWORD_STEMS: dict[Category, tuple[str, ...]] = {
    Category.UPDATE: ("update", "updates", "updated", "updating"),
    Category.FIX_CORRECT: (
        "fix", "fixes", "fixed", "fixing",
        "correct", "corrects", "corrected", "correcting",
    ),
    Category.ADD: ("add", "adds", "added", "adding"),
    Category.DELETE_REMOVE: (
        "delete", "deletes", "deleted", "deleting",
        "remove", "removes", "removed", "removing",
    ),
    Category.MODIFY_CHANGE: (
        "modify", "modifies", "modified", "modifying",
        "change", "changes", "changed", "changing",
    ),
    Category.MERGE: ("merge", "merges", "merged", "merging"),
    Category.CREATE: ("create", "creates", "created", "creating"),
}


def compile_keyword_patterns(
    stems: Mapping[Category, Sequence[str]] | None = None,
) -> dict[Category, re.Pattern[str]]:
    stems = stems or DEFAULT_KEYWORD_STEMS
    patterns: dict[Category, re.Pattern[str]] = {}
    for category, words in stems.items():
        alternatives = "|".join(re.escape(w) for w in words)
        patterns[category] = re.compile(rf"\b(?:{alternatives})\b", re.IGNORECASE)
    return patterns


_DEFAULT_PATTERNS = compile_keyword_patterns()


def classify_comment(
    message: str,
    *,
    whole_message: bool = False,
    patterns: Mapping[Category, re.Pattern[str]] | None = None,
) -> frozenset[Category]:
    """Categories whose keywords appear in the comment; {other} if none.

    Only the first line is inspected by default — the conventional summary —
    unless `whole_message` is set.
    """
    patterns = patterns or _DEFAULT_PATTERNS
    text = message if whole_message else (message.splitlines()[0] if message else "")
    matched = frozenset(cat for cat, pat in patterns.items() if pat.search(text))
    return matched if matched else frozenset({Category.OTHER})


@dataclass(frozen=True)
class CategoryTally:
    """Per-category commit counts over a corpus.

    Multi-keyword commits count once per matched category, so the category
    counts can sum to more than `total_commits`.
    """

    counts: Mapping[Category, int]
    total_commits: int

    def count(self, category: Category) -> int:
        return self.counts.get(category, 0)

    def share(self, category: Category) -> float:
        """count / total_commits; 0.0 on an empty corpus."""
        if self.total_commits == 0:
            return 0.0
        return self.count(category) / self.total_commits


def tally(
    commits: Iterable[CommitRecord],
    *,
    whole_message: bool = False,
    patterns: Mapping[Category, re.Pattern[str]] | None = None,
) -> CategoryTally:
    counts: dict[Category, int] = {category: 0 for category in Category}
    total = 0
    for commit in commits:
        total += 1
        for category in classify_comment(
            commit.message, whole_message=whole_message, patterns=patterns
        ):
            counts[category] += 1
    return CategoryTally(counts=counts, total_commits=total)
