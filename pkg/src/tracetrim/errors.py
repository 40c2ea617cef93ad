"""Exception types shared across the package."""


class TracetrimError(Exception):
    """Base class for all package-specific failures."""


# --- trace parsing / call tree ---------------------------------------------

class UnparseableDocument(TracetrimError):
    """Input bytes are not a trace document with an event array."""


class UnbalancedEvents(TracetrimError):
    """An End event has no matching Begin on its thread (LIFO order)."""


class OverlapViolation(TracetrimError):
    """Two events on one thread overlap partially; containment is undefined."""


# --- script parsing / editing -----------------------------------------------

class ScriptSyntaxError(TracetrimError):
    """Source text falls outside the supported script subset."""

    def __init__(self, message: str, line: int, column: int, expected: str = ""):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column
        self.expected = expected


class LocusNotFound(TracetrimError):
    """A node locus does not resolve in the given tree."""


class ReparseFailure(TracetrimError):
    """An edit produced source that no longer parses."""


class SpanDrift(TracetrimError):
    """File contents changed since the candidate was enumerated."""


# --- screenshots -------------------------------------------------------------

class DimensionMismatch(TracetrimError):
    """Two screenshots have different dimensions and cannot be diffed."""


# --- harness / search --------------------------------------------------------

class HarnessUnavailable(TracetrimError):
    """The evaluation backend (e.g. a live browser) cannot be reached."""


class OracleNeverLoads(TracetrimError):
    """The unmodified app never shows its load sentinel; nothing to optimize."""
