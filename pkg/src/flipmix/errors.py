"""Exception types shared across the package.

ValidationError covers anything the caller got wrong (bad input, exceeded
size guard); ConsistencyError covers internal identities failing, which
always indicates a bug rather than bad input.
"""


class FlipmixError(Exception):
    pass


class ValidationError(FlipmixError, ValueError):
    """Bad user input: malformed graph text, out-of-range parameter, size guard."""


class ConsistencyError(FlipmixError):
    """An internal mathematical identity or convergence guarantee failed."""
