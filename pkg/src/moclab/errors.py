"""Exception hierarchy.

Errors are grouped so the command-line layer can map them onto exit codes:
configuration problems (3) and numerical problems (4).
"""


class MoclabError(Exception):
    """Base class for all library errors."""


class ConfigError(MoclabError):
    """Invalid user input (grid parameters, configs, ranges)."""


class NumericError(MoclabError):
    """A numerical procedure failed or left its domain of validity."""


class NonIntegerRatio(ConfigError):
    pass


class DegenerateGrid(ConfigError):
    pass


class InvalidOmega(ConfigError):
    pass


class UnsupportedScheme(ConfigError):
    pass


class GridTooLarge(ConfigError):
    pass


class RangeError(ConfigError):
    pass


class StencilOverflow(ConfigError):
    pass


class ParseError(ConfigError):
    """Malformed config text. ``errors`` holds ``(line, message)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"line {ln}: {msg}" for ln, msg in self.errors))


class ValidationError(ConfigError):
    """Well-formed config with bad values. ``errors`` holds ``(key, message)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{key}: {msg}" for key, msg in self.errors))


class MissingHistory(NumericError):
    pass


class ErrorBlowup(NumericError):
    pass


class NoConvergence(NumericError):
    pass


class ValidityViolation(NumericError):
    pass


class NotAnEigenpair(NumericError):
    pass


class NonPositiveNorm(NumericError):
    pass


class InsufficientSamples(NumericError):
    pass


class DegenerateFit(NumericError):
    pass
