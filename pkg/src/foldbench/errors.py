"""Exception and warning types shared across the harness."""


class HarnessError(Exception):
    """Base class for every error foldbench raises deliberately."""


class ParseError(HarnessError):
    """Input text that does not conform to its format.

    Carries the source (path or description) and a 1-based line number
    when one is known.
    """

    def __init__(self, message, source=None, line=None):
        self.source = source
        self.line = line
        prefix = ""
        if source is not None:
            prefix += f"{source}: "
        if line is not None:
            prefix += f"line {line}: "
        super().__init__(prefix + message)


class ValidationError(HarnessError):
    """Well-formed input that violates a documented contract."""


class ConfigError(HarnessError):
    """Configuration file cannot be loaded or resolved."""


class HarnessWarning(UserWarning):
    """Non-fatal conditions: empty scans, classes smaller than K, ..."""
