"""Exception hierarchy shared by all rbcsp modules."""


class RBError(Exception):
    """Base class for all rbcsp computation errors."""


class CapacityError(RBError):
    """A size limit was exceeded (tuple space too large, brute-force guard, ...)."""


class DegenerateError(RBError):
    """Parameters round to a degenerate instance (e.g. q = d^k leaves no legal tuple)."""


class FormatError(RBError):
    """Syntactic problem in an RBCSP document or a config file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvariantError(FormatError):
    """A decoded document violates instance invariants (unsorted scope, bad code, ...)."""


class BracketError(RBError):
    """A bisection could not certify a bracket on the scanned range."""


class RangeError(RBError):
    """A fitted curve never reaches the requested level inside the data range."""


class ConfigError(RBError):
    """A sweep configuration is missing keys or contains invalid values."""
