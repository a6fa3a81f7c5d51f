"""Exception hierarchy shared by all solarcast modules."""


class SolarcastError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SolarcastError):
    """Malformed or duplicate input rows; carries the offending row number."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class ValidationError(SolarcastError):
    """A precondition or invariant was violated (bounds, shapes, degenerate ranges)."""


class InsufficientDataError(SolarcastError):
    """Not enough usable data: too few rows, years, residuals, or an unrecoverable gap."""


class CollinearityError(SolarcastError):
    """Singular or near-singular design matrix; names the offending columns."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class FitError(SolarcastError):
    """A model fit could not be completed (no clear days, unstable roots, zero variance)."""


class DivergenceError(SolarcastError):
    """Training produced a non-finite loss; carries the trace up to the failure."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class ConfigError(SolarcastError):
    """Run configuration problem; carries the dotted field path."""

    def __init__(self, message, path=""):
        if path:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path
