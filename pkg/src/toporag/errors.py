"""Typed exceptions shared across the package."""


class ToporagError(Exception):
    """Base class for all package errors."""


class ParseError(ToporagError):
    """A file could not be parsed into the expected structure."""


class ValidationError(ToporagError):
    """Structurally parsed input violates a graph invariant."""


class MissingGraphError(ToporagError):
    """A QA fixture references a graph file that does not exist."""


class IoError(ToporagError):
    """Filesystem read/write failure."""


class DimensionMismatch(ToporagError):
    """Vectors of incompatible dimensionality were combined."""


class ZeroVector(ToporagError):
    """Cosine similarity is undefined for an all-zero vector."""


class ProviderUnavailable(ToporagError):
    """An external provider could not be reached or failed server-side."""


class ProviderRejected(ToporagError):
    """An external provider rejected the request (HTTP 4xx)."""


class CacheCorrupt(ToporagError):
    """The embedding cache file is unreadable or internally inconsistent."""


class SelfLoopExcluded(ToporagError):
    """Self-loop edges do not induce 2-cells."""


class EmptyCandidates(ToporagError):
    """No cell carries positive prize and no fallback cell was supplied."""


class TooLarge(ToporagError):
    """Instance exceeds an exhaustive-enumeration guard."""


class DanglingCell(ToporagError):
    """A subcomplex references a cell absent from the source graph."""


class EmptySubcomplex(ToporagError):
    """An operation requires at least one cell."""
