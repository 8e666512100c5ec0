"""Label adding commits: practicality, content kind, transplantability.

An adding commit is unpractical when it only contributes explanations or
media, a missing symbol, configuration dependencies, or README prose; the
rest add functional code and are candidates for extraction. Practical
additions carry a content kind (flat statements, a function, a class, or
other) and a transplantability verdict (easy when the added code binds
every variable it uses).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import PurePosixPath
from typing import Iterable, Mapping, Sequence

from . import minilang
from .analysis import analyze_free
from .classify import Category, classify_comment
from .errors import ParseError
from .ingest import AddedBlock, CommitRecord, extract_added_blocks, has_adjacent_removals
from .minilang import CONTROL_KEYWORDS, SyntaxUnit, parse_lenient

DEFAULT_MEDIA_EXTENSIONS = frozenset({"png", "jpg", "jpeg", "gif", "svg", "ico"})
DEFAULT_DOC_DIRS = frozenset({"docs", "doc"})
DEFAULT_CONFIG_FILENAMES = frozenset({
    "pom.xml", "build.gradle", "settings.gradle", "build.gradle.kts",
    "package.json", "package-lock.json", "yarn.lock", "cargo.toml",
    "pyproject.toml", "setup.cfg", "requirements.txt", "gemfile",
    "androidmanifest.xml", "web.xml", "makefile",
})
DEFAULT_CONFIG_EXTENSIONS = frozenset({"gradle", "properties", "lock"})
DEFAULT_CONFIG_DIRS = frozenset({"config", "conf", "build", ".github", "ci"})
DEFAULT_CONFIG_DIR_EXTENSIONS = frozenset({"xml", "json", "yaml", "yml", "toml", "ini", "cfg"})
DEFAULT_MISSING_SYMBOL_THRESHOLD = 2


class UnpracticalReason(enum.IntEnum):
    EXPLANATION_OR_MEDIA = 1
    MISSING_SYMBOL = 2
    CONFIG_DEPENDENCY = 3
    README_ANNOTATION = 4


@dataclass(frozen=True)
class PracticalityLabel:
    practical: bool
    reason: UnpracticalReason | None = None

    def __post_init__(self) -> None:
        if self.practical == (self.reason is not None):
            raise ValueError("unpractical labels carry a reason; practical ones do not")


class ContentValue(enum.Enum):
    SIMPLE_ADDING = "simple_adding"
    ADDING_FUNCTION = "adding_function"
    ADDING_CLASS = "adding_class"
    OTHER = "other"


class OtherReason(enum.Enum):
    LOGICAL_FRAGMENT = "logical_fragment"
    VALUE_MODIFICATION = "value_modification"


@dataclass(frozen=True)
class ContentKind:
    value: ContentValue
    other_reason: OtherReason | None = None

    def __post_init__(self) -> None:
        if (self.value is ContentValue.OTHER) != (self.other_reason is not None):
            raise ValueError("other_reason is present exactly when value is other")


@dataclass(frozen=True)
class Transplantability:
    easy: bool
    unresolved: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.easy != (not self.unresolved):
            raise ValueError("easy means no unresolved variables")


@dataclass(frozen=True)
class OrganCandidate:
    commit: CommitRecord
    blocks: tuple[AddedBlock, ...]
    practicality: PracticalityLabel
    content: ContentKind | None = None
    transplantability: Transplantability | None = None

    def __post_init__(self) -> None:
        if not self.practicality.practical and (
            self.content is not None or self.transplantability is not None
        ):
            raise ValueError("unpractical additions carry no content or transplant labels")


@dataclass(frozen=True)
class FileClassSets:
    """Extension/name sets that drive the unpractical-adding conditions."""

    media_extensions: frozenset[str] = DEFAULT_MEDIA_EXTENSIONS
    doc_dirs: frozenset[str] = DEFAULT_DOC_DIRS
    config_filenames: frozenset[str] = DEFAULT_CONFIG_FILENAMES
    config_extensions: frozenset[str] = DEFAULT_CONFIG_EXTENSIONS
    config_dirs: frozenset[str] = DEFAULT_CONFIG_DIRS
    config_dir_extensions: frozenset[str] = DEFAULT_CONFIG_DIR_EXTENSIONS

    def is_readme(self, path: str) -> bool:
        return PurePosixPath(path).stem.lower() == "readme"

    def is_media_or_doc(self, path: str) -> bool:
        p = PurePosixPath(path)
        ext = p.suffix.lstrip(".").lower()
        if ext in self.media_extensions:
            return True
        # prose .md files count only inside documentation trees, README aside
        if ext == "md" and not self.is_readme(path):
            return any(part.lower() in self.doc_dirs for part in p.parts[:-1])
        return False

    def is_config(self, path: str) -> bool:
        p = PurePosixPath(path)
        name = p.name.lower()
        ext = p.suffix.lstrip(".").lower()
        if name in self.config_filenames:
            return True
        if ext in self.config_extensions:
            return True
        if ext in self.config_dir_extensions:
            return any(part.lower() in self.config_dirs for part in p.parts[:-1])
        return False


def count_added_tokens(blocks: Sequence[AddedBlock]) -> int:
    """Code tokens (comments and whitespace excluded) across all added lines."""
    text = "\n".join(line for block in blocks for line in block.lines)
    return len(minilang.DEFAULT_TOKENIZER.tokenize(text))


def judge_practicality(
    commit: CommitRecord,
    blocks: Sequence[AddedBlock],
    *,
    file_classes: FileClassSets | None = None,
    missing_symbol_threshold: int = DEFAULT_MISSING_SYMBOL_THRESHOLD,
) -> PracticalityLabel:
    """First matching unpractical condition wins; otherwise practical.

    Conditions, in order: (1) every changed file is media or documentation;
    (2) the added text is at most a couple of tokens (a missing symbol);
    (3) every changed file is a build/config manifest; (4) every changed
    file is a README. Commits mixing code with media stay practical.
    """
    classes = file_classes or FileClassSets()
    paths = [change.path for change in commit.files]
    if paths and all(classes.is_media_or_doc(p) for p in paths):
        return PracticalityLabel(False, UnpracticalReason.EXPLANATION_OR_MEDIA)
    if count_added_tokens(blocks) <= missing_symbol_threshold:
        return PracticalityLabel(False, UnpracticalReason.MISSING_SYMBOL)
    if paths and all(classes.is_config(p) for p in paths):
        return PracticalityLabel(False, UnpracticalReason.CONFIG_DEPENDENCY)
    if paths and all(classes.is_readme(p) for p in paths):
        return PracticalityLabel(False, UnpracticalReason.README_ANNOTATION)
    return PracticalityLabel(True)


def _has_control_flow(block: AddedBlock) -> bool:
    tokens = minilang.DEFAULT_TOKENIZER.tokenize("\n".join(block.lines))
    return any(t.kind == "ident" and t.text in CONTROL_KEYWORDS for t in tokens)


def parse_blocks(blocks: Sequence[AddedBlock]) -> list[SyntaxUnit | None]:
    """Parse each block leniently; None when even brace balancing fails."""
    parsed: list[SyntaxUnit | None] = []
    for block in blocks:
        try:
            parsed.append(parse_lenient("\n".join(block.lines)))
        except ParseError:
            parsed.append(None)
    return parsed


def classify_content(
    blocks: Sequence[AddedBlock],
    parsed: Sequence[SyntaxUnit | None],
    paired_removals: bool,
) -> ContentKind:
    """Content kind of a practical addition.

    A complete class wins over a complete function; additions replacing
    adjacent removed lines are value modifications; control-flow fragments
    are logical fragments; the rest is simple adding.
    """
    kinds = {
        unit.kind
        for tree in parsed
        if tree is not None
        for unit in tree.walk()
    }
    if "class_def" in kinds:
        return ContentKind(ContentValue.ADDING_CLASS)
    if "function_def" in kinds:
        return ContentKind(ContentValue.ADDING_FUNCTION)
    if paired_removals:
        return ContentKind(ContentValue.OTHER, OtherReason.VALUE_MODIFICATION)
    if any(_has_control_flow(block) for block in blocks):
        return ContentKind(ContentValue.OTHER, OtherReason.LOGICAL_FRAGMENT)
    return ContentKind(ContentValue.SIMPLE_ADDING)


def organ_free_report(blocks: Sequence[AddedBlock], context: SyntaxUnit | None = None):
    """Free-identifier report over the union of a commit's added blocks.

    Blocks are analyzed as one fragment so that a name defined in one block
    binds uses in another (the addition is one organ even when the added
    code appears in several places).
    """
    combined = "\n".join(line for block in blocks for line in block.lines)
    return analyze_free(parse_lenient(combined), context)


def classify_transplantability(
    blocks: Sequence[AddedBlock],
    context: SyntaxUnit | None = None,
) -> Transplantability:
    report = organ_free_report(blocks, context)
    if report.variables:
        return Transplantability(False, frozenset(report.variables))
    return Transplantability(True)


def analyze_commit(
    commit: CommitRecord,
    *,
    file_classes: FileClassSets | None = None,
    missing_symbol_threshold: int = DEFAULT_MISSING_SYMBOL_THRESHOLD,
    whole_message: bool = False,
    patterns=None,
    practicality_override: PracticalityLabel | None = None,
) -> OrganCandidate | None:
    """Full labeling of one commit; None when it is not an adding commit."""
    categories = classify_comment(commit.message, whole_message=whole_message, patterns=patterns)
    if Category.ADD not in categories:
        return None
    blocks = tuple(extract_added_blocks(commit))
    practicality = practicality_override or judge_practicality(
        commit,
        blocks,
        file_classes=file_classes,
        missing_symbol_threshold=missing_symbol_threshold,
    )
    if not practicality.practical:
        return OrganCandidate(commit=commit, blocks=blocks, practicality=practicality)
    parsed = parse_blocks(blocks)
    content = classify_content(blocks, parsed, has_adjacent_removals(commit))
    transplantability = classify_transplantability(blocks)
    return OrganCandidate(
        commit=commit,
        blocks=blocks,
        practicality=practicality,
        content=content,
        transplantability=transplantability,
    )


@dataclass(frozen=True)
class LabelTally:
    """Counts over labeled adding commits, with the partition identities."""

    adding_total: int
    practical: int
    unpractical: int
    unpractical_reasons: Mapping[UnpracticalReason, int]
    content_counts: Mapping[ContentValue, int]
    easy: int
    difficult: int

    def share(self, count: int, total: int) -> float:
        return count / total if total else 0.0


def tally_labels(candidates: Iterable[OrganCandidate]) -> LabelTally:
    adding = practical = easy = 0
    reasons: dict[UnpracticalReason, int] = {r: 0 for r in UnpracticalReason}
    contents: dict[ContentValue, int] = {v: 0 for v in ContentValue}
    for candidate in candidates:
        adding += 1
        if candidate.practicality.practical:
            practical += 1
            if candidate.content is not None:
                contents[candidate.content.value] += 1
            if candidate.transplantability is not None and candidate.transplantability.easy:
                easy += 1
        else:
            reasons[candidate.practicality.reason] += 1
    return LabelTally(
        adding_total=adding,
        practical=practical,
        unpractical=adding - practical,
        unpractical_reasons=reasons,
        content_counts=contents,
        easy=easy,
        difficult=practical - easy,
    )
