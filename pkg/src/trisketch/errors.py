"""Exception hierarchy shared across the package.

Every error raised by the library derives from TriSketchError so callers
(and the CLI exit-code mapping) can distinguish library failures from bugs.
"""


class TriSketchError(Exception):
    """Base class for all library errors."""


class ZeroInverse(TriSketchError):
    """Multiplicative inverse of zero requested."""


class ZeroId(TriSketchError):
    """Identifier 0 is outside the allowed codomain (nonzero residues only)."""


class VertexOutOfRange(TriSketchError):
    """Vertex id outside [0, n)."""


class EmptySlotArray(TriSketchError):
    """Slot index requested for an anchor with zero slots."""


class ParseError(TriSketchError):
    """Malformed graph file."""


class NotSimple(TriSketchError):
    """Self-loop or duplicate edge in graph input."""


class IdOutOfRange(TriSketchError):
    """Edge endpoint outside the declared vertex range."""


class InfeasibleParams(TriSketchError):
    """Generator or parameter request that cannot be satisfied."""


class ParamMismatch(TriSketchError):
    """Seed parameters inconsistent with the graph they are applied to."""


class InactiveClass(TriSketchError):
    """Query against a class that never materialized."""


class StateMismatch(TriSketchError):
    """Sketch state, seed bundle, and graph identities disagree."""


class TraceMismatch(TriSketchError):
    """Gate trace does not belong to the given sketch state."""


class InstanceTooLarge(TriSketchError):
    """Naive replay oracle refused an instance above its size cap."""


class SchemaError(TriSketchError):
    """Malformed certificate; carries the offending field path."""

    def __init__(self, path: str, message: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if message else path)


class SeedSchemaError(SchemaError):
    """Malformed seeds record inside a certificate."""
