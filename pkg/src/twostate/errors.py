"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class TsvfError(Exception):
    """Base class for all errors raised by this package."""


class BasisError(TsvfError, ValueError):
    """Operands live on different (or malformed) labeled bases."""


class TopologyError(TsvfError):
    """The element graph is not a valid single-assignment DAG."""


class UnknownNameError(TsvfError, KeyError):
    """A detector, wire or scene id that does not exist was requested."""

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class PostselectionImpossible(TsvfError):
    """The overlap of forward and backward states is below the floor."""


class InconsistentPostselection(TsvfError):
    """Every ABL numerator vanishes, so the conditional law is undefined."""


class EmptyPostselection(TsvfError):
    """A partial postselection projects the preselected state to zero."""


class ComplexityError(TsvfError):
    """Path enumeration exceeded the configured component limit."""


class ConfigError(TsvfError, ValueError):
    """A simulation configuration violates its preconditions."""


class SceneError(TsvfError):
    """An error located in scene-file text."""

    def __init__(self, message: str, line: int = 0, column: int = 0, expected: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.expected = expected
        super().__init__(str(self))

    def __str__(self) -> str:
        where = f"line {self.line}, column {self.column}: " if self.line else ""
        tail = f" (expected {self.expected})" if self.expected else ""
        return f"{where}{self.message}{tail}"


class ParseError(SceneError):
    """The scene text does not match the grammar."""


class SemanticError(SceneError):
    """The scene text parses but describes an invalid network."""


class SceneTopologyError(TopologyError, SceneError):
    """A scene file whose wiring forms a cycle."""
