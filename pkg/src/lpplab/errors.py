"""Exception types shared across the lab."""


class ParameterError(ValueError):
    """Invalid argument value (bad distribution parameter, malformed config)."""


class StabilityError(ParameterError):
    """Queueing stability violated: customers arrive faster than they are served."""


class RangeError(IndexError):
    """Lattice point or window outside the region an object covers."""


class CapacityError(RuntimeError):
    """Request exceeds a hard size limit (table cells, enumeration span, window)."""


class TieError(RuntimeError):
    """A tie was hit under a rule that forbids ties; carries the offending site."""

    def __init__(self, site, message=None):
        self.site = tuple(site)
        super().__init__(message or f"tie at site {self.site}")
