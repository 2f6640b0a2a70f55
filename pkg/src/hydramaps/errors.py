"""Exception hierarchy and process exit codes.

Every failure the library can report falls into one of three buckets:
malformed input (a map spec or value that does not satisfy a type
invariant), a violated mathematical precondition (an operation was asked
to run outside the regime where its defining identity holds), or a
resource guard (a computation whose cost would exceed a configured cap).
The CLI maps these onto distinct exit codes.
"""

EXIT_OK = 0
EXIT_SPEC_ERROR = 2
EXIT_PRECONDITION = 3
EXIT_RESOURCE = 4


class HydraError(Exception):
    """Base class for all library-specific errors."""


class MapSpecError(HydraError, ValueError):
    """A map specification or serialized value is structurally invalid."""


class NotPIntegralError(HydraError, ValueError):
    """A rational with denominator not coprime to p was passed where a
    p-integral value is required."""


class PreconditionError(HydraError, ValueError):
    """A mathematical precondition of the requested operation fails.

    The message names the violated condition (e.g. ``requires rho < 1``)
    so callers can see which hypothesis broke rather than just that one
    did.
    """


class ResourceLimitError(HydraError, RuntimeError):
    """The requested computation exceeds a resource guard."""
