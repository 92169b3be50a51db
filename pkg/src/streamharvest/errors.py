"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class StreamHarvestError(Exception):
    """Base class for every error raised by streamharvest."""


class ArgumentError(StreamHarvestError, ValueError):
    """Malformed input: wrong shapes, invalid matrices, inconsistent groupings."""


class DomainError(StreamHarvestError, ValueError):
    """Inputs are well formed but outside the region where a result is defined."""


class UnsupportedCaseError(DomainError):
    """The requested closed form only exists under stronger hypotheses."""


class NumericalError(StreamHarvestError, RuntimeError):
    """An iterative method failed to converge.

    ``best`` carries the best iterate found, when there is one, and ``time``
    the simulation time at which an integrator gave up.
    """

    def __init__(self, message, *, best=None, time=None):
        super().__init__(message)
        self.best = best
        self.time = time


class ScenarioError(StreamHarvestError, ValueError):
    """A scenario file could not be parsed or failed validation."""

    def __init__(self, message, *, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.key = key
        self.line = line
