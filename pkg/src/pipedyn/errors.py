"""Exception types raised by the solvers, the dispatch layer and the optimizers.

Every error derives from a builtin (ValueError / RuntimeError) so callers that
only know the standard hierarchy keep working; the CLI maps the whole family
to exit code 3.
"""

from __future__ import annotations


class PipedynError(Exception):
    """Base class for all library errors."""


class DomainError(PipedynError, ValueError):
    """An input lies outside the domain of a formula."""


class InfeasibleError(PipedynError, ValueError):
    """The formula has no admissible (real, positive, in-range) solution."""


class SingularityError(PipedynError, ValueError):
    """A denominator of the formula vanishes."""


class AlreadyExceededError(InfeasibleError):
    """The guarded threshold is already exceeded; act immediately."""


class NotReadyError(PipedynError, RuntimeError):
    """Not enough resolved samples yet (pressure wave has not arrived)."""


class ProtocolError(PipedynError, RuntimeError):
    """Events were delivered out of order."""


class NotFoundError(PipedynError, ValueError):
    """A scan found no sign change / no admissible point."""


class NumericalError(PipedynError, RuntimeError):
    """A linear system or an iteration failed numerically."""
