"""Read a git repository: commits, diffs, and contiguous added-line blocks.

Works against standard on-disk repositories through the git CLI; no network
access. Merge commits are diffed against their first parent so they stay
visible to the keyword classifier. Binary changes keep an (empty-hunk)
FileChange so media-only commits can be recognized downstream.
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass
from datetime import date, datetime, timezone
from pathlib import Path

from .errors import IngestError

_FIELD_SEP = "\x1f"
_RECORD_SEP = "\x1e"


@dataclass(frozen=True)
class DiffHunk:
    new_start: int  # 1-based first line of the hunk in the post-image
    lines: tuple[tuple[str, str], ...]  # (marker, text); marker: context|added|removed


@dataclass(frozen=True)
class FileChange:
    path: str
    kind: str  # added | deleted | modified | renamed
    hunks: tuple[DiffHunk, ...]


@dataclass(frozen=True)
class CommitRecord:
    id: str
    timestamp: int  # committer time, seconds since epoch (UTC)
    author: str
    message: str
    files: tuple[FileChange, ...]

    @property
    def summary(self) -> str:
        return self.message.splitlines()[0] if self.message else ""


@dataclass(frozen=True)
class AddedBlock:
    path: str
    start_line: int  # 1-based post-image line of the first added line
    lines: tuple[str, ...]


def _run_git(repo_path: str | Path, *args: str) -> str:
    try:
        proc = subprocess.run(
            ["git", "-C", str(repo_path), *args],
            capture_output=True,
            text=True,
            errors="replace",
        )
    except OSError as exc:
        raise IngestError(f"cannot run git for {repo_path}: {exc}") from exc
    if proc.returncode != 0:
        raise IngestError(
            f"git {' '.join(args[:1])} failed for {repo_path}: {proc.stderr.strip()}"
        )
    return proc.stdout


def _cutoff_epoch(cutoff: datetime | date | int | None) -> int | None:
    """Normalize a cutoff to epoch seconds; bare dates include the whole day."""
    if cutoff is None:
        return None
    if isinstance(cutoff, int):
        return cutoff
    if isinstance(cutoff, datetime):
        if cutoff.tzinfo is None:
            cutoff = cutoff.replace(tzinfo=timezone.utc)
        return int(cutoff.timestamp())
    end_of_day = datetime(cutoff.year, cutoff.month, cutoff.day, 23, 59, 59, tzinfo=timezone.utc)
    return int(end_of_day.timestamp())


def _parse_hunks(lines: list[str], start: int) -> tuple[tuple[DiffHunk, ...], int]:
    hunks: list[DiffHunk] = []
    i = start
    while i < len(lines) and lines[i].startswith("@@"):
        header = lines[i]
        try:
            new_part = header.split("+", 1)[1].split(" ", 1)[0]
            new_start = int(new_part.split(",")[0])
        except (IndexError, ValueError):
            new_start = 1
        i += 1
        hunk_lines: list[tuple[str, str]] = []
        while i < len(lines):
            line = lines[i]
            if line.startswith("+"):
                hunk_lines.append(("added", line[1:]))
            elif line.startswith("-"):
                hunk_lines.append(("removed", line[1:]))
            elif line.startswith(" "):
                hunk_lines.append(("context", line[1:]))
            elif line.startswith("\\"):
                pass  # "\ No newline at end of file"
            else:
                break
            i += 1
        hunks.append(DiffHunk(new_start=new_start, lines=tuple(hunk_lines)))
    return tuple(hunks), i


def _strip_prefix(path: str, prefix: str) -> str:
    path = path.strip()
    if path.startswith('"') and path.endswith('"'):
        path = path[1:-1]
    if path.startswith(prefix):
        return path[len(prefix):]
    return path


def parse_patch(patch: str) -> tuple[FileChange, ...]:
    """Parse `git diff` patch text into per-file changes."""
    lines = patch.split("\n")
    changes: list[FileChange] = []
    i = 0
    n = len(lines)
    while i < n:
        line = lines[i]
        if not line.startswith("diff --git "):
            i += 1
            continue
        rest = line[len("diff --git "):]
        # split "a/<old> b/<new>" at the last " b/" so spaces survive
        cut = rest.rfind(" b/")
        old_path = _strip_prefix(rest[:cut] if cut != -1 else rest, "a/")
        new_path = _strip_prefix(rest[cut + 1:] if cut != -1 else rest, "b/")
        kind = "modified"
        path = new_path
        i += 1
        while i < n and not lines[i].startswith(("diff --git ", "@@")):
            meta = lines[i]
            if meta.startswith("new file mode"):
                kind = "added"
            elif meta.startswith("deleted file mode"):
                kind = "deleted"
                path = old_path
            elif meta.startswith("rename to "):
                kind = "renamed"
                path = _strip_prefix(meta[len("rename to "):], "")
            elif meta.startswith("+++ "):
                target = meta[4:].strip()
                if target != "/dev/null":
                    path = _strip_prefix(target, "b/")
            elif meta.startswith("Binary files") or meta.startswith("GIT binary patch"):
                pass
            i += 1
        hunks, i = _parse_hunks(lines, i)
        changes.append(FileChange(path=path, kind=kind, hunks=hunks))
    return tuple(changes)


def _commit_patch(repo_path: str | Path, commit_id: str, parents: list[str]) -> str:
    if parents:
        return _run_git(
            repo_path, "diff-tree", "-p", "-M", "--no-commit-id", parents[0], commit_id
        )
    return _run_git(repo_path, "diff-tree", "-p", "-M", "--no-commit-id", "--root", commit_id)


def enumerate_commits(
    repo_path: str | Path,
    cutoff: datetime | date | int | None = None,
    *,
    all_branches: bool = False,
) -> list[CommitRecord]:
    """All commits up to the cutoff, ascending by (timestamp, id).

    Default-branch history only unless `all_branches` is set. Merge commits
    are included and diffed against their first parent.
    """
    repo = Path(repo_path)
    if not repo.exists():
        raise IngestError(f"not a git repository: {repo_path}")
    _run_git(repo, "rev-parse", "--git-dir")
    head = subprocess.run(
        ["git", "-C", str(repo), "rev-parse", "--verify", "-q", "HEAD"],
        capture_output=True,
        text=True,
    )
    if head.returncode != 0:
        return []  # repository with no commits
    scope = ["--all"] if all_branches else ["HEAD"]
    log = _run_git(
        repo,
        "log",
        f"--format=%H{_FIELD_SEP}%ct{_FIELD_SEP}%an{_FIELD_SEP}%P{_FIELD_SEP}%B{_RECORD_SEP}",
        *scope,
    )
    limit = _cutoff_epoch(cutoff)
    records: list[CommitRecord] = []
    seen: set[str] = set()
    for entry in log.split(_RECORD_SEP):
        entry = entry.strip("\n")
        if not entry:
            continue
        commit_id, ts, author, parents_field, message = entry.split(_FIELD_SEP, 4)
        commit_id = commit_id.strip()
        if commit_id in seen:
            continue
        seen.add(commit_id)
        timestamp = int(ts)
        if limit is not None and timestamp > limit:
            continue
        parents = parents_field.split()
        patch = _commit_patch(repo, commit_id, parents)
        records.append(
            CommitRecord(
                id=commit_id,
                timestamp=timestamp,
                author=author,
                message=message.rstrip("\n"),
                files=parse_patch(patch),
            )
        )
    records.sort(key=lambda r: (r.timestamp, r.id))
    return records


def extract_added_blocks(commit: CommitRecord) -> list[AddedBlock]:
    """Maximal runs of consecutive added lines, ordered by (path, start_line)."""
    blocks: list[AddedBlock] = []
    for change in commit.files:
        for hunk in change.hunks:
            new_line = hunk.new_start
            run_start: int | None = None
            run_lines: list[str] = []
            for marker, text in hunk.lines:
                if marker == "added":
                    if run_start is None:
                        run_start = new_line
                    run_lines.append(text)
                    new_line += 1
                else:
                    if run_lines:
                        blocks.append(
                            AddedBlock(change.path, run_start, tuple(run_lines))
                        )
                        run_start, run_lines = None, []
                    if marker == "context":
                        new_line += 1
            if run_lines:
                blocks.append(AddedBlock(change.path, run_start, tuple(run_lines)))
    blocks.sort(key=lambda b: (b.path, b.start_line))
    return blocks


def added_line_count(commit: CommitRecord) -> int:
    return sum(
        1
        for change in commit.files
        for hunk in change.hunks
        for marker, _ in hunk.lines
        if marker == "added"
    )


def has_adjacent_removals(commit: CommitRecord) -> bool:
    """True when some added line sits next to a removed line (edit-in-place)."""
    for change in commit.files:
        for hunk in change.hunks:
            markers = [m for m, _ in hunk.lines]
            for prev, cur in zip(markers, markers[1:]):
                if {prev, cur} == {"added", "removed"}:
                    return True
    return False
