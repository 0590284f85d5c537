class ShortexpError(Exception):
    """Base class for domain errors raised by this package."""


class BlanketAssumptionError(ShortexpError, ValueError):
    """The recorded input sequence is identically zero."""


class PriorBoundsViolated(ShortexpError):
    """The data contradict the supplied lag/state bounds (L, N)."""


class DepthExhausted(ShortexpError):
    """rank G_{k,t} = m + rank H_{k-1,t}: no input can raise rank H_{k,t}."""


class NotInformative(ShortexpError):
    """Identification was requested on data that fail the informativity test."""


class ReplayMismatch(ShortexpError):
    """A replayed recording is inconsistent with what the procedure requires."""


class IdentificationError(ShortexpError):
    """Internal consistency guard in the realization step tripped."""
