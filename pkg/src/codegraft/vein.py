"""Collect context definitions an organ needs and fuse them into a graft.

For each variable the organ uses but does not bind, every defining or
assigning statement before the insertion point is collected; only the
latest one survives, re-typed from the variable's declaration when the
latest change was a bare assignment. If a surviving statement itself leans
on further variables, their latest definitions are pulled in too, and the
result is ordered so every name is defined before use. The vein prepended
to the organ (kept byte-identical) is the graft.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .analysis import (
    CallGraph,
    ScopeModel,
    StatementFacts,
    _FactsScan,
    analyze_free,
    last_definitions,
)
from .errors import IntegrationError, UnresolvableVeinError, VeinCycleError
from .ingest import AddedBlock
from .minilang import ASSIGN_OPS, SyntaxUnit, Token, parse_lenient
from .organs import organ_free_report


@dataclass(frozen=True)
class Organ:
    """Added code plus where it sat in the donor and what it fails to bind."""

    blocks: tuple[AddedBlock, ...]
    donor_class: str
    donor_function: str | None
    insertion_line: int
    free_vars: frozenset[str]
    external_callees: frozenset[str]

    @property
    def lines(self) -> tuple[str, ...]:
        return tuple(line for block in self.blocks for line in block.lines)

    @property
    def text(self) -> str:
        return "\n".join(self.lines)


def build_organ(
    blocks: Sequence[AddedBlock],
    *,
    insertion_line: int,
    donor_class: str = "",
    donor_function: str | None = None,
    context: SyntaxUnit | None = None,
) -> Organ:
    report = organ_free_report(blocks, context)
    return Organ(
        blocks=tuple(blocks),
        donor_class=donor_class,
        donor_function=donor_function,
        insertion_line=insertion_line,
        free_vars=report.variables,
        external_callees=frozenset(report.callees | report.type_refs),
    )


@dataclass(frozen=True)
class VeinStatement:
    variable: str
    text: str
    origin_line: int
    declared_type: str | None
    conditional_origin: bool
    requires: frozenset[str]


@dataclass(frozen=True)
class Vein:
    statements: tuple[VeinStatement, ...]
    covered: frozenset[str]


@dataclass(frozen=True)
class GraftProvenance:
    donor_repo: str
    commit_id: str
    donor_class: str


@dataclass(frozen=True)
class Graft:
    text: str
    provenance: GraftProvenance
    required_imports: frozenset[str]
    vein: Vein
    organ_lines: tuple[str, ...]
    donor_function: str | None = None


def extract_related(
    organ: Organ,
    context: SyntaxUnit,
    graph: CallGraph | None = None,
) -> dict[str, list[StatementFacts]]:
    """All context statements touching each free variable of the organ."""
    related: dict[str, list[StatementFacts]] = {}
    for variable in sorted(organ.free_vars):
        statements = last_definitions(variable, organ.insertion_line, context, graph)
        if not statements:
            raise UnresolvableVeinError(variable)
        related[variable] = statements
    return related


def _pick_latest(
    statements: Sequence[StatementFacts], insertion_line: int
) -> StatementFacts:
    below = [s for s in statements if s.line < insertion_line]
    if below:
        return max(below, key=lambda s: s.line)
    return statements[0]  # defined only later in call-graph order; keep nearest


def _rhs_from_tokens(tokens: Sequence[Token], variable: str) -> tuple[str, str] | None:
    """Last `variable <op> expr` in the token run; returns (op, expr text)."""
    result: tuple[str, str] | None = None
    for i, tok in enumerate(tokens):
        if tok.kind != "ident" or tok.text != variable:
            continue
        if i > 0 and tokens[i - 1].text == ".":
            continue
        if i + 1 < len(tokens) and tokens[i + 1].text in ASSIGN_OPS:
            rhs: list[str] = []
            depth = 0
            for t in tokens[i + 2 :]:
                if t.text in ("(", "["):
                    depth += 1
                elif t.text in (")", "]"):
                    if depth == 0:
                        break
                    depth -= 1
                elif t.text in (";", ",") and depth == 0:
                    break
                rhs.append(t.text)
            result = (tokens[i + 1].text, _join_tokens(rhs))
        elif i + 1 < len(tokens) and tokens[i + 1].text in ("++", "--"):
            op = "+" if tokens[i + 1].text == "++" else "-"
            result = ("=", f"{variable} {op} 1")
        elif i > 0 and tokens[i - 1].text in ("++", "--"):
            op = "+" if tokens[i - 1].text == "++" else "-"
            result = ("=", f"{variable} {op} 1")
    return result


def _join_tokens(texts: Sequence[str]) -> str:
    out = ""
    for text in texts:
        if out and text not in (",", ";", ".", ")", "]", "++", "--") and not out.endswith(("(", "[", ".")):
            out += " "
        out += text
    return out


def _nearest_declared_type(
    model: ScopeModel, variable: str, at_line: int
) -> str | None:
    best_line = -1
    best: str | None = None
    fallback: str | None = None
    for leaf in model.leaves:
        facts = model.facts[id(leaf)]
        declared = facts.declared_types.get(variable)
        if declared is None:
            continue
        if facts.line <= at_line and facts.line > best_line:
            best_line, best = facts.line, declared
        if fallback is None:
            fallback = declared
    return best if best is not None else fallback


def _statement_is_header(facts: StatementFacts) -> bool:
    return facts.text.rstrip().endswith("{")


def _synthesize(
    facts: StatementFacts, variable: str, model: ScopeModel
) -> tuple[str, str | None, frozenset[str]]:
    """Render the kept change as one standalone declaration statement."""
    declared_type = facts.declared_types.get(variable) or _nearest_declared_type(
        model, variable, facts.line
    )
    if variable in facts.defined and not _statement_is_header(facts):
        # already a full declaration statement: keep it verbatim
        text = facts.text.strip()
        requires = frozenset(facts.referenced - {variable})
        return text, facts.declared_types.get(variable), requires
    assignment = _rhs_from_tokens(list(facts.tokens), variable)
    if assignment is None:
        # declaration without initializer inside a header, or opaque change
        if declared_type:
            return f"{declared_type} {variable};", declared_type, frozenset()
        return facts.text.strip(), None, frozenset(facts.referenced - {variable})
    op, rhs = assignment
    if op != "=":
        rhs = f"{variable} {op[:-1]} {rhs}"
    scan = _FactsScan(list(_tokenize(rhs)))
    scan.run()
    requires = frozenset(scan.referenced - {variable})
    if declared_type:
        return f"{declared_type} {variable} = {rhs};", declared_type, requires
    return f"{variable} = {rhs};", None, requires


def _tokenize(text: str) -> tuple[Token, ...]:
    from .minilang import DEFAULT_TOKENIZER

    return tuple(DEFAULT_TOKENIZER.tokenize(text))


def select_practical(
    related: Mapping[str, Sequence[StatementFacts]],
    *,
    insertion_line: int,
    context: SyntaxUnit,
    graph: CallGraph | None = None,
) -> Vein:
    """Keep the latest change per variable, restore types, close over deps."""
    model = ScopeModel(context)
    kept: dict[str, VeinStatement] = {}
    worklist: list[tuple[str, StatementFacts]] = [
        (variable, _pick_latest(statements, insertion_line))
        for variable, statements in sorted(related.items())
    ]
    while worklist:
        variable, facts = worklist.pop(0)
        if variable in kept:
            continue
        text, declared_type, requires = _synthesize(facts, variable, model)
        kept[variable] = VeinStatement(
            variable=variable,
            text=text,
            origin_line=facts.line,
            declared_type=declared_type,
            conditional_origin=facts.conditional,
            requires=requires,
        )
        for needed in sorted(requires):
            if needed in kept or any(v == needed for v, _ in worklist):
                continue
            statements = last_definitions(needed, facts.line, context, graph)
            if not statements:
                raise UnresolvableVeinError(needed)
            worklist.append((needed, _pick_latest(statements, facts.line)))
    ordered = _topological(kept)
    return Vein(statements=tuple(ordered), covered=frozenset(kept))


def _topological(kept: Mapping[str, VeinStatement]) -> list[VeinStatement]:
    pending = dict(kept)
    ordered: list[VeinStatement] = []
    while pending:
        blocking = set(pending)
        ready = [
            stmt
            for stmt in pending.values()
            if not (stmt.requires & (blocking - {stmt.variable}))
        ]
        if not ready:
            raise VeinCycleError(list(pending))
        ready.sort(key=lambda s: (s.origin_line, s.variable))
        for stmt in ready:
            ordered.append(stmt)
            del pending[stmt.variable]
    return ordered


def integrate(
    vein: Vein,
    organ: Organ,
    *,
    donor_repo: str = "",
    commit_id: str = "",
) -> Graft:
    """Vein statements first, organ lines byte-identical after."""
    missing = set(organ.free_vars) - set(vein.covered)
    if missing:
        raise IntegrationError(missing)
    vein_lines = [stmt.text for stmt in vein.statements]
    organ_lines = organ.lines
    text = "\n".join([*vein_lines, *organ_lines])
    leftover = analyze_free(parse_lenient(text)).variables
    if leftover:
        raise IntegrationError(set(leftover))
    return Graft(
        text=text,
        provenance=GraftProvenance(donor_repo, commit_id, organ.donor_class),
        required_imports=organ.external_callees,
        vein=vein,
        organ_lines=organ_lines,
        donor_function=organ.donor_function,
    )


def make_graft(
    organ: Organ,
    context: SyntaxUnit,
    graph: CallGraph | None = None,
    *,
    donor_repo: str = "",
    commit_id: str = "",
) -> Graft:
    """Full donor-side pipeline: related statements, selection, integration."""
    if not organ.free_vars:
        return integrate(
            Vein(statements=(), covered=frozenset()),
            organ,
            donor_repo=donor_repo,
            commit_id=commit_id,
        )
    related = extract_related(organ, context, graph)
    vein = select_practical(
        related, insertion_line=organ.insertion_line, context=context, graph=graph
    )
    return integrate(vein, organ, donor_repo=donor_repo, commit_id=commit_id)


_HEADER_PREFIX = "// codegraft-"


def write_graft(graft: Graft, path: str | Path) -> None:
    """Write a graft as a source file with a provenance header."""
    header = [
        f"{_HEADER_PREFIX}donor-repo: {graft.provenance.donor_repo}",
        f"{_HEADER_PREFIX}donor-commit: {graft.provenance.commit_id}",
        f"{_HEADER_PREFIX}donor-class: {graft.provenance.donor_class}",
        f"{_HEADER_PREFIX}donor-function: {graft.donor_function or ''}",
        f"{_HEADER_PREFIX}vein-lines: {len(graft.vein.statements)}",
    ]
    for stmt in graft.vein.statements:
        header.append(
            f"{_HEADER_PREFIX}vein: {stmt.variable} line={stmt.origin_line}"
            f" type={stmt.declared_type or '?'} conditional={str(stmt.conditional_origin).lower()}"
        )
    for imp in sorted(graft.required_imports):
        header.append(f"{_HEADER_PREFIX}requires: {imp}")
    Path(path).write_text("\n".join([*header, graft.text]) + "\n", encoding="utf-8")


def read_graft(path: str | Path) -> Graft:
    """Load a graft written by write_graft."""
    raw = Path(path).read_text(encoding="utf-8")
    meta: dict[str, str] = {}
    vein_statements: list[VeinStatement] = []
    imports: set[str] = set()
    body: list[str] = []
    in_header = True
    for line in raw.split("\n"):
        if in_header and line.startswith(_HEADER_PREFIX):
            key, _, value = line[len(_HEADER_PREFIX):].partition(":")
            value = value.strip()
            if key == "vein":
                fields = value.split()
                variable = fields[0]
                attrs = dict(f.split("=", 1) for f in fields[1:])
                vein_statements.append(
                    VeinStatement(
                        variable=variable,
                        text="",
                        origin_line=int(attrs.get("line", "0")),
                        declared_type=None if attrs.get("type") == "?" else attrs.get("type"),
                        conditional_origin=attrs.get("conditional") == "true",
                        requires=frozenset(),
                    )
                )
            elif key == "requires":
                imports.add(value)
            else:
                meta[key] = value
            continue
        in_header = False
        body.append(line)
    while body and body[-1] == "":
        body.pop()
    vein_count = int(meta.get("vein-lines", "0"))
    vein_statements = [
        VeinStatement(
            variable=stmt.variable,
            text=body[i] if i < len(body) else stmt.text,
            origin_line=stmt.origin_line,
            declared_type=stmt.declared_type,
            conditional_origin=stmt.conditional_origin,
            requires=stmt.requires,
        )
        for i, stmt in enumerate(vein_statements)
    ]
    return Graft(
        text="\n".join(body),
        provenance=GraftProvenance(
            meta.get("donor-repo", ""),
            meta.get("donor-commit", ""),
            meta.get("donor-class", ""),
        ),
        required_imports=frozenset(imports),
        vein=Vein(statements=tuple(vein_statements), covered=frozenset(s.variable for s in vein_statements)),
        organ_lines=tuple(body[vein_count:]),
        donor_function=meta.get("donor-function") or None,
    )
