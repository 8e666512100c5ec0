"""Rank host classes by name similarity and drive the insert-and-test loop.

A class name usually tells what the class does, so hosts are ranked by
word overlap with the donor class name: f(x, y) = N(x, y) / (N(x) + N(y))
over the word sets of the two names, an exact rational in [0, 1/2].
Candidates are tried best-first; after every failed attempt (and in dry
runs) the host file is restored byte-identically.
"""

from __future__ import annotations

import difflib
import re
import shlex
import shutil
import subprocess
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ParseError, TransplantSetupError
from .minilang import SyntaxUnit, parse
from .vein import Graft

_WORD_RE = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z]*|[a-z]+|\d+")


@dataclass(frozen=True)
class ClassName:
    raw: str
    words: tuple[str, ...]


def split_name(raw: str) -> ClassName:
    """Split on case transitions, digits, and separators; lowercase tokens."""
    if not raw:
        raise ValueError("class name must be nonempty")
    words = tuple(w.lower() for w in _WORD_RE.findall(raw))
    if not words:
        raise ValueError(f"class name has no word tokens: {raw!r}")
    return ClassName(raw=raw, words=words)


@dataclass(frozen=True)
class FitnessScore:
    value: Fraction
    n_common: int
    n_x: int
    n_y: int


def fitness(x: ClassName, y: ClassName) -> FitnessScore:
    """Shared-word count over the summed word-set sizes (duplicates once)."""
    if not x.words or not y.words:
        raise ValueError("fitness needs nonempty word lists")
    set_x, set_y = set(x.words), set(y.words)
    n_common = len(set_x & set_y)
    return FitnessScore(
        value=Fraction(n_common, len(set_x) + len(set_y)),
        n_common=n_common,
        n_x=len(set_x),
        n_y=len(set_y),
    )


@dataclass(frozen=True)
class MatchRanking:
    donor: ClassName
    candidates: tuple[tuple[ClassName, FitnessScore], ...]


def rank(donor: ClassName, hosts: Iterable[ClassName]) -> MatchRanking:
    """Hosts by descending fitness; ties alphabetical by raw name."""
    unique: dict[str, ClassName] = {}
    for host in hosts:
        unique.setdefault(host.raw, host)
    if not unique:
        raise ValueError("host class set is empty")
    scored = [(host, fitness(donor, host)) for host in unique.values()]
    scored.sort(key=lambda pair: (-pair[1].value, pair[0].raw))
    return MatchRanking(donor=donor, candidates=tuple(scored))


@dataclass(frozen=True)
class EditLedger:
    adding: int
    deleting: int
    modifying: int


def record_edits(before: Mapping[str, str], after: Mapping[str, str]) -> EditLedger:
    """Classify the line diff between two snapshots into atomic operations.

    A removed line adjacent to an added one counts as a single modification;
    the rest count as plain additions or deletions. New files are allowed in
    `after`; a file may not disappear.
    """
    missing = set(before) - set(after)
    if missing:
        raise ValueError(f"files missing from the after snapshot: {sorted(missing)}")
    adding = deleting = modifying = 0
    for path in sorted(after):
        old = before.get(path, "").splitlines()
        new = after[path].splitlines()
        matcher = difflib.SequenceMatcher(a=old, b=new, autojunk=False)
        for op, i1, i2, j1, j2 in matcher.get_opcodes():
            if op == "insert":
                adding += j2 - j1
            elif op == "delete":
                deleting += i2 - i1
            elif op == "replace":
                removed, added = i2 - i1, j2 - j1
                paired = min(removed, added)
                modifying += paired
                adding += added - paired
                deleting += removed - paired
    return EditLedger(adding=adding, deleting=deleting, modifying=modifying)


@dataclass(frozen=True)
class Attempt:
    candidate: str
    file: str
    insert_line: int
    exit_status: int | None  # None: timed out (dry runs record no status)
    passed: bool


@dataclass(frozen=True)
class TransplantOutcome:
    status: str  # "success" | "failure"
    attempts: tuple[Attempt, ...]
    edits: EditLedger
    dry_run: bool = False
    skipped: tuple[str, ...] = ()  # candidates with no mappable source file


def _class_index(host_root: Path, source_ext: str) -> dict[str, tuple[Path, SyntaxUnit]]:
    index: dict[str, tuple[Path, SyntaxUnit]] = {}
    for path in sorted(host_root.rglob(f"*{source_ext}")):
        try:
            tree = parse(path.read_text(encoding="utf-8", errors="replace"))
        except ParseError:
            continue
        for unit in tree.walk():
            if unit.kind == "class_def" and unit.name and unit.name not in index:
                index[unit.name] = (path, unit)
    return index


def _graft_shape(graft: Graft) -> str:
    """"definition" for class/function organs, "statements" otherwise."""
    try:
        tree = parse("\n".join(graft.organ_lines))
    except ParseError:
        return "statements"
    kinds = {unit.kind for unit in tree.walk()}
    if "class_def" in kinds or "function_def" in kinds:
        return "definition"
    return "statements"


def plan_insertion(graft: Graft, class_unit: SyntaxUnit, shape: str) -> int:
    """Line (1-based, insert-before) where the graft goes in the host file.

    Definition-shaped grafts land at the end of the class body; statement
    grafts land at the top of the host function whose name best matches the
    donor function, falling back to the end of the class body.
    """
    end_of_class = class_unit.span[1]  # the closing-brace line
    if shape == "definition" or not graft.donor_function:
        return end_of_class
    functions = [u for u in class_unit.walk() if u.kind == "function_def" and u.name]
    if not functions:
        return end_of_class
    donor = split_name(graft.donor_function)
    best = max(
        functions,
        key=lambda u: (fitness(donor, split_name(u.name)).value, -u.span[0]),
    )
    header = next((c for c in best.children if c.role == "header"), None)
    return (header.span[1] if header else best.span[0]) + 1


def _resolve_command(test_command: str | Sequence[str]) -> None:
    argv0 = (
        shlex.split(test_command)[0]
        if isinstance(test_command, str)
        else (test_command[0] if test_command else "")
    )
    if not argv0:
        raise TransplantSetupError("empty test command")
    if shutil.which(argv0) is None and not Path(argv0).exists():
        raise TransplantSetupError(f"test command not executable: {argv0}")


def _run_test(
    test_command: str | Sequence[str], host_root: Path, timeout: float
) -> int | None:
    try:
        proc = subprocess.run(
            test_command,
            cwd=host_root,
            shell=isinstance(test_command, str),
            capture_output=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired:
        return None
    return proc.returncode


def transplant_loop(
    graft: Graft,
    ranking: MatchRanking,
    host_root: str | Path,
    test_command: str | Sequence[str],
    *,
    dry_run: bool = False,
    timeout: float = 300.0,
    source_ext: str = ".mini",
) -> TransplantOutcome:
    """Insert the graft into hosts best-first until the test passes.

    Stops at the first passing candidate (success) or after all of them
    (failure). Hosts are restored byte-identically after failed attempts and
    dry runs; only a successful transplant leaves the host modified.
    """
    root = Path(host_root)
    _resolve_command(test_command)
    index = _class_index(root, source_ext)
    shape = _graft_shape(graft)
    attempts: list[Attempt] = []
    skipped: list[str] = []
    success = False
    for candidate, _score in ranking.candidates:
        located = index.get(candidate.raw)
        if located is None:
            skipped.append(candidate.raw)
            continue
        path, class_unit = located
        insert_line = plan_insertion(graft, class_unit, shape)
        if dry_run:
            attempts.append(
                Attempt(candidate.raw, str(path), insert_line, None, False)
            )
            continue
        original = path.read_bytes()
        lines = original.decode("utf-8", errors="replace").split("\n")
        lines[insert_line - 1 : insert_line - 1] = graft.text.split("\n")
        path.write_text("\n".join(lines), encoding="utf-8")
        exit_status = _run_test(test_command, root, timeout)
        passed = exit_status == 0
        attempts.append(Attempt(candidate.raw, str(path), insert_line, exit_status, passed))
        if passed:
            success = True
            break
        path.write_bytes(original)
    return TransplantOutcome(
        status="success" if success else "failure",
        attempts=tuple(attempts),
        edits=EditLedger(0, 0, 0),  # post-insertion fixups are accounted separately
        dry_run=dry_run,
        skipped=tuple(skipped),
    )
