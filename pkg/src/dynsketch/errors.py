"""Exception hierarchy. All errors derive from :class:`ValueError`, so callers that
only care about invalid input can keep catching that."""

from __future__ import annotations


class DynSketchError(ValueError):
    """Base class for all package errors"""


class ZeroInverseError(DynSketchError, ZeroDivisionError):
    """Attempt to invert a residue congruent to zero"""


class InvalidGraphError(DynSketchError):
    """Graph violates a structural requirement (endpoint range, terminal list, etc.)"""


class InvalidQueryError(DynSketchError):
    """Query edge is out of range, a self-loop or a duplicate"""


class CapacityOverflowError(DynSketchError):
    """Capacity expansion exceeds the configured parallel edge bound"""


class EmptyTerminalError(DynSketchError):
    """Sketch has no terminals to query (no terminal-incident capacity)"""


class SizeLimitError(DynSketchError):
    """Input is too large for an exhaustive oracle or verification run"""


class NegativeWeightError(DynSketchError):
    """Weights and capacities of graphs and queries must be nonnegative"""


class FixtureError(DynSketchError):
    """Lower-bound fixture parameters are inconsistent"""


class FormatError(DynSketchError):
    """Text graph or query format is malformed"""

    def __init__(self, message: str, *, line: int | None = None) -> None:
        """Initialize a parse error, optionally bound to an input line.

        :param message: error description
        :param line: 1-based line number of the offending record
        """
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ContainerError(DynSketchError):
    """Binary sketch container is truncated, has a wrong magic, tag or version"""
