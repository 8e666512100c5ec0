"""Identifier facts, scope resolution, call graphs, and definition search.

Identifiers are tracked in the broad sense: a name appearing in added code
may be a variable, a called function, or a class. Only variables can be
(re)defined by assignment statements, so the analysis reports them apart
from called names and type references.

Classification of a dotted chain's root follows source convention: a root
that is defined in scope is a variable; an undefined uppercase-initial root
is a class reference; an undefined lowercase-initial root is a free
variable. Bare (undotted) reads are variables regardless of case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import CallGraphError
from .minilang import (
    ASSIGN_OPS,
    KEYWORDS,
    MODIFIERS,
    PRIMITIVE_TYPES,
    SyntaxUnit,
    Token,
)

_TYPEISH = frozenset({"<", ">", "[", "]", ",", ".", "?"})


@dataclass(frozen=True)
class StatementFacts:
    """What one statement does to identifiers."""

    line: int
    text: str
    defined: frozenset[str]
    assigned: frozenset[str]
    referenced: frozenset[str]
    declared_types: Mapping[str, str]
    callees: frozenset[str]
    type_refs: frozenset[str]
    conditional: bool = False  # statement sits inside an if/for/while body
    tokens: tuple[Token, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class FreeIdentifierReport:
    """Free names of a parsed fragment, split by what could supply them."""

    variables: frozenset[str]
    callees: frozenset[str]
    type_refs: frozenset[str]
    context_defined: frozenset[str] = frozenset()


@dataclass(frozen=True)
class CallGraph:
    """Call relations between the functions of one class."""

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    entry_order: tuple[str, ...]


class _FactsScan:
    """Single pass over a token run collecting identifier facts."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.defined: set[str] = set()
        self.assigned: set[str] = set()
        self.referenced: set[str] = set()
        self.declared_types: dict[str, str] = {}
        self.callees: set[str] = set()
        self.type_refs: set[str] = set()

    def run(self) -> None:
        toks = self.tokens
        i = 0
        after_new = False
        while i < len(toks):
            tok = toks[i]
            if tok.text == "@":
                i = self._skip_annotation(i)
                continue
            if tok.kind != "ident":
                if tok.text in ("++", "--") and i + 1 < len(toks) and toks[i + 1].kind == "ident":
                    name = toks[i + 1].text
                    if self._is_name(name):
                        self.assigned.add(name)
                        self.referenced.add(name)
                    i += 2
                    continue
                i += 1
                continue
            if tok.text in MODIFIERS:
                i += 1
                continue
            if tok.text in ("this", "super"):
                i = self._skip_chain(i)
                continue
            if tok.text == "new":
                after_new = True
                i += 1
                continue
            if tok.text in KEYWORDS:
                i += 1
                continue
            decl = self._match_declaration(i)
            if decl is not None and not after_new:
                name, type_text, next_i = decl
                self.defined.add(name)
                if type_text:
                    self.declared_types[name] = type_text
                    self._record_type(type_text)
                if next_i < len(toks) and toks[next_i].text == "=":
                    self.assigned.add(name)
                i = next_i
                continue
            i = self._handle_chain(i, after_new)
            after_new = False
        # primitives never reach the reference sets
        self.referenced -= PRIMITIVE_TYPES

    def _is_name(self, text: str) -> bool:
        return text not in KEYWORDS and text not in PRIMITIVE_TYPES and text not in MODIFIERS

    def _skip_annotation(self, i: int) -> int:
        toks = self.tokens
        i += 1
        if i < len(toks) and toks[i].kind == "ident":
            i += 1
            while i + 1 < len(toks) and toks[i].text == "." and toks[i + 1].kind == "ident":
                i += 2
            if i < len(toks) and toks[i].text == "(":
                depth = 0
                while i < len(toks):
                    if toks[i].text in ("(", "["):
                        depth += 1
                    elif toks[i].text in (")", "]"):
                        depth -= 1
                        if depth == 0:
                            return i + 1
                    i += 1
        return i

    def _skip_chain(self, i: int) -> int:
        toks = self.tokens
        i += 1
        while i + 1 < len(toks) and toks[i].text == "." and toks[i + 1].kind == "ident":
            i += 2
        return i

    def _match_declaration(self, i: int) -> tuple[str, str, int] | None:
        """Match `Type name` (with optional generics/array suffix) at i."""
        toks = self.tokens
        type_tok = toks[i]
        if type_tok.kind != "ident":
            return None
        if type_tok.text in KEYWORDS or type_tok.text in MODIFIERS:
            return None
        j = i + 1
        type_parts = [type_tok.text]
        if j < len(toks) and toks[j].text == "<":
            depth = 0
            k = j
            while k < len(toks):
                t = toks[k]
                if t.text == "<":
                    depth += 1
                elif t.text == ">":
                    depth -= 1
                    if depth == 0:
                        break
                elif t.kind != "ident" and t.text not in _TYPEISH:
                    return None
                k += 1
            else:
                return None
            type_parts.extend(t.text for t in toks[j : k + 1])
            j = k + 1
        while j + 1 < len(toks) and toks[j].text == "[" and toks[j + 1].text == "]":
            type_parts.extend(("[", "]"))
            j += 2
        if j >= len(toks):
            return None
        name_tok = toks[j]
        if name_tok.kind != "ident" or not self._is_name(name_tok.text):
            return None
        after = toks[j + 1].text if j + 1 < len(toks) else ";"
        if after not in (";", "=", ",", ")", ":"):
            return None
        return name_tok.text, "".join(type_parts), j + 1

    def _record_type(self, type_text: str) -> None:
        root = type_text.split("<")[0].split("[")[0]
        if root and root not in PRIMITIVE_TYPES:
            self.type_refs.add(root)

    def _handle_chain(self, i: int, after_new: bool) -> int:
        toks = self.tokens
        parts = [toks[i].text]
        j = i + 1
        while j + 1 < len(toks) and toks[j].text == "." and toks[j + 1].kind == "ident":
            parts.append(toks[j + 1].text)
            j += 2
        root = parts[0]
        full = ".".join(parts)
        dotted = len(parts) > 1
        after = toks[j].text if j < len(toks) else ""
        if after_new:
            self.callees.add(full)
            self.type_refs.add(root)
            return j
        if after == "(":
            self.callees.add(full)
            if dotted:
                self._record_root(root)
            return j
        if after in ASSIGN_OPS:
            if dotted:
                self._record_root(root)  # member write reads the object
            else:
                self.assigned.add(root)
                if after != "=":
                    self.referenced.add(root)
            return j
        if after in ("++", "--") and not dotted:
            self.assigned.add(root)
            self.referenced.add(root)
            return j + 1
        if dotted:
            self._record_root(root)
        else:
            self.referenced.add(root)
        return j

    def _record_root(self, root: str) -> None:
        if root[0].isupper():
            self.type_refs.add(root)
        else:
            self.referenced.add(root)


def _function_params(tokens: list[Token]) -> tuple[dict[str, str], set[str]]:
    """Pull `(type name, ...)` parameter declarations out of a function header."""
    close = -1
    depth = 0
    for idx in range(len(tokens) - 1, -1, -1):
        text = tokens[idx].text
        if text in (")", "]"):
            depth += 1
            if depth == 1 and text == ")":
                close = idx
        elif text in ("(", "["):
            depth -= 1
            if depth == 0 and close != -1:
                open_idx = idx
                break
    else:
        return {}, set()
    groups: list[list[Token]] = [[]]
    level = 0
    for tok in tokens[open_idx + 1 : close]:
        if tok.text in ("(", "[", "<"):
            level += 1
        elif tok.text in (")", "]", ">"):
            level -= 1
        if tok.text == "," and level == 0:
            groups.append([])
        else:
            groups[-1].append(tok)
    params: dict[str, str] = {}
    type_refs: set[str] = set()
    for group in groups:
        # keep plain idents, dropping modifiers and annotation names (@Foo)
        idents: list[str] = []
        prev_at = False
        for t in group:
            if t.text == "@":
                prev_at = True
                continue
            if t.kind == "ident":
                if prev_at:
                    prev_at = False
                    continue
                if t.text not in MODIFIERS:
                    idents.append(t.text)
            prev_at = False
        if not idents:
            continue
        name = idents[-1]
        if name in KEYWORDS:
            continue
        params[name] = ""
        if len(idents) >= 2:
            param_type = idents[0]
            params[name] = param_type
            if param_type not in PRIMITIVE_TYPES:
                type_refs.add(param_type)
    return params, type_refs


def _empty_facts(unit: SyntaxUnit) -> StatementFacts:
    return StatementFacts(
        line=unit.span[0],
        text=unit.text,
        defined=frozenset(),
        assigned=frozenset(),
        referenced=frozenset(),
        declared_types={},
        callees=frozenset(),
        type_refs=frozenset(),
        tokens=unit.tokens,
    )


def statement_facts(unit: SyntaxUnit, parent_kind: str = "block", conditional: bool = False) -> StatementFacts:
    """Compute identifier facts for one statement leaf."""
    if unit.role == "closer":
        return _empty_facts(unit)
    if unit.role == "header" and parent_kind == "function_def":
        params, type_refs = _function_params(list(unit.tokens))
        return StatementFacts(
            line=unit.span[0],
            text=unit.text,
            defined=frozenset(params),
            assigned=frozenset(),
            referenced=frozenset(),
            declared_types={n: t for n, t in params.items() if t},
            callees=frozenset(),
            type_refs=frozenset(type_refs),
            conditional=conditional,
            tokens=unit.tokens,
        )
    if unit.role == "header" and parent_kind == "class_def":
        extends = frozenset(
            t.text
            for prev, t in zip(unit.tokens, unit.tokens[1:])
            if prev.text in ("extends", "implements") and t.kind == "ident"
        )
        return StatementFacts(
            line=unit.span[0],
            text=unit.text,
            defined=frozenset(),
            assigned=frozenset(),
            referenced=frozenset(),
            declared_types={},
            callees=frozenset(),
            type_refs=extends,
            conditional=conditional,
            tokens=unit.tokens,
        )
    scan = _FactsScan(list(unit.tokens))
    scan.run()
    return StatementFacts(
        line=unit.span[0],
        text=unit.text,
        defined=frozenset(scan.defined),
        assigned=frozenset(scan.assigned),
        referenced=frozenset(scan.referenced),
        declared_types=dict(scan.declared_types),
        callees=frozenset(scan.callees),
        type_refs=frozenset(scan.type_refs),
        conditional=conditional,
        tokens=unit.tokens,
    )


class ScopeModel:
    """Scope chain, per-leaf facts, and enclosing-function map for one tree.

    Definitions are order-insensitive within a scope: a name defined anywhere
    in a block binds references throughout it, matching how class members and
    whole-fragment checks behave.
    """

    def __init__(self, root: SyntaxUnit):
        self.root = root
        self.facts: dict[int, StatementFacts] = {}
        self.scope_defs: dict[int, set[str]] = {}
        self.scope_parent: dict[int, int | None] = {}
        self.leaf_scope: dict[int, int] = {}
        self.leaf_function: dict[int, SyntaxUnit | None] = {}
        self.leaves: list[SyntaxUnit] = []
        self._visit(root, None, None, False)

    def _visit(
        self,
        unit: SyntaxUnit,
        parent_scope: int | None,
        function: SyntaxUnit | None,
        conditional: bool,
    ) -> None:
        sid = id(unit)
        self.scope_defs[sid] = set()
        self.scope_parent[sid] = parent_scope
        if unit.kind == "function_def":
            function = unit
        for child in unit.children:
            if child.kind == "statement":
                facts = statement_facts(child, unit.kind, conditional)
                cid = id(child)
                self.facts[cid] = facts
                self.leaf_scope[cid] = sid
                self.leaf_function[cid] = function
                self.scope_defs[sid].update(facts.defined)
                self.leaves.append(child)
            else:
                if child.name:
                    self.scope_defs[sid].add(child.name)
                self._visit(child, sid, function, conditional or child.kind == "block")

    def is_bound(self, name: str, leaf: SyntaxUnit) -> bool:
        sid: int | None = self.leaf_scope[id(leaf)]
        while sid is not None:
            if name in self.scope_defs[sid]:
                return True
            sid = self.scope_parent[sid]
        return False

    def all_defined(self) -> set[str]:
        names: set[str] = set()
        for defs in self.scope_defs.values():
            names |= defs
        return names


def analyze_free(root: SyntaxUnit, context: SyntaxUnit | None = None) -> FreeIdentifierReport:
    """Report every name referenced in `root` but not defined within it."""
    model = ScopeModel(root)
    free_vars: set[str] = set()
    callees: set[str] = set()
    type_refs: set[str] = set()
    for leaf in model.leaves:
        facts = model.facts[id(leaf)]
        for name in facts.referenced:
            if not model.is_bound(name, leaf):
                free_vars.add(name)
        for callee in facts.callees:
            root_name = callee.split(".")[0]
            if not model.is_bound(root_name, leaf):
                callees.add(callee)
        for tname in facts.type_refs:
            if not model.is_bound(tname, leaf):
                type_refs.add(tname)
    context_defined: frozenset[str] = frozenset()
    if context is not None:
        context_defined = frozenset(free_vars & ScopeModel(context).all_defined())
    return FreeIdentifierReport(
        variables=frozenset(free_vars),
        callees=frozenset(callees),
        type_refs=frozenset(type_refs),
        context_defined=context_defined,
    )


def free_identifiers(root: SyntaxUnit, context: SyntaxUnit | None = None) -> frozenset[str]:
    """Free variables of the fragment (called names reported separately)."""
    return analyze_free(root, context).variables


def _functions_of(class_unit: SyntaxUnit) -> dict[str, SyntaxUnit]:
    functions: dict[str, SyntaxUnit] = {}
    for unit in class_unit.walk():
        if unit.kind == "function_def" and unit.name and unit.name not in functions:
            functions[unit.name] = unit
    return functions


def _referenced_names(function: SyntaxUnit) -> set[str]:
    model = ScopeModel(function)
    names: set[str] = set()
    for leaf in model.leaves:
        facts = model.facts[id(leaf)]
        names |= facts.referenced
        names |= {c.split(".")[0] for c in facts.callees}
    return names


def build_call_graph(class_unit: SyntaxUnit, organ_function: str) -> CallGraph:
    """Call graph over the functions of one class, BFS-ordered from the organ.

    An edge (f, g) exists when f's body mentions g by name; BFS order is the
    search order for definitions of names the organ does not bind itself.
    """
    functions = _functions_of(class_unit)
    if organ_function not in functions:
        raise CallGraphError(f"function '{organ_function}' not found in class")
    order = list(functions)
    mentions = {name: _referenced_names(unit) for name, unit in functions.items()}
    edges = [
        (caller, callee)
        for caller in order
        for callee in order
        if callee in mentions[caller]
    ]
    out_edges: dict[str, list[str]] = {name: [] for name in order}
    for caller, callee in edges:
        out_edges[caller].append(callee)
    entry_order: list[str] = []
    seen = {organ_function}
    queue = [organ_function]
    while queue:
        current = queue.pop(0)
        entry_order.append(current)
        for nxt in out_edges[current]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return CallGraph(nodes=tuple(order), edges=tuple(edges), entry_order=tuple(entry_order))


def last_definitions(
    variable: str,
    before_line: int,
    scope: SyntaxUnit,
    graph: CallGraph | None = None,
) -> list[StatementFacts]:
    """Every statement that defines or assigns `variable` before a point.

    The function enclosing `before_line` (or the top level) is searched
    first, in source order; with a call graph, the remaining functions are
    searched in breadth-first entry order regardless of their position
    relative to the insertion point.
    """
    model = ScopeModel(scope)
    functions = _functions_of(scope)
    home: SyntaxUnit | None = None
    for unit in functions.values():
        if unit.span[0] <= before_line <= unit.span[1]:
            if home is None or unit.span[0] >= home.span[0]:
                home = unit

    def matches(facts: StatementFacts) -> bool:
        return variable in facts.defined or variable in facts.assigned

    results: list[StatementFacts] = []
    seen: set[int] = set()
    for leaf in model.leaves:
        facts = model.facts[id(leaf)]
        if model.leaf_function[id(leaf)] is home and facts.line < before_line and matches(facts):
            results.append(facts)
            seen.add(id(leaf))
    if graph is not None:
        home_name = home.name if home is not None else None
        units_by_name = {name: unit for name, unit in functions.items()}
        for fn_name in graph.entry_order:
            if fn_name == home_name or fn_name not in units_by_name:
                continue
            fn_unit = units_by_name[fn_name]
            for leaf in model.leaves:
                if id(leaf) in seen:
                    continue
                enclosing = model.leaf_function[id(leaf)]
                if enclosing is not None and enclosing.name == fn_name and matches(
                    model.facts[id(leaf)]
                ):
                    results.append(model.facts[id(leaf)])
                    seen.add(id(leaf))
    return results
