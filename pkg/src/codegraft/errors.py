"""Exception types shared across the toolkit."""

from __future__ import annotations


class CodegraftError(Exception):
    """Base class for all toolkit errors."""


class IngestError(CodegraftError):
    """Raised when a repository cannot be read or is not a git repository."""


class ParseError(CodegraftError):
    """Raised on unbalanced braces; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


class CallGraphError(CodegraftError):
    """Raised when the function holding the organ is absent from the class."""


class VeinError(CodegraftError):
    """Base class for vein extraction failures."""


class UnresolvableVeinError(VeinError):
    """A free variable has no definition anywhere in the donor context."""

    def __init__(self, variable: str):
        super().__init__(f"no definition found for variable '{variable}' in context")
        self.variable = variable


class VeinCycleError(VeinError):
    """Kept definition statements depend on each other cyclically."""

    def __init__(self, variables: list[str]):
        super().__init__(f"cyclic definitions among variables: {', '.join(sorted(variables))}")
        self.variables = sorted(variables)


class IntegrationError(CodegraftError):
    """The vein does not cover every free variable of the organ."""

    def __init__(self, missing: set[str]):
        super().__init__(f"vein does not cover variables: {', '.join(sorted(missing))}")
        self.missing = sorted(missing)


class TransplantSetupError(CodegraftError):
    """The test command cannot run; raised before any host mutation."""
