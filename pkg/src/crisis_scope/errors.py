"""Exception types shared across the pipeline.

The CLI maps these onto exit codes: validation-style errors exit 1,
backend and IO errors exit 2.
"""


class CrisisScopeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CrisisScopeError):
    """Input violates a documented precondition or invariant."""


class SchemaError(ValidationError):
    """A structured file (query, config, claims) is missing required fields."""


class ParseError(ValidationError):
    """A record in an input file could not be parsed.

    Carries the 1-based line number where parsing failed.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IntegrityError(ValidationError):
    """Data is well-formed but internally inconsistent (e.g. duplicate ids)."""


class UnsupportedLanguageError(ValidationError):
    """No annotator backend is registered for a message's language code."""

    def __init__(self, lang: str, available: tuple[str, ...] = ()):
        self.lang = lang
        self.available = available
        detail = f"no annotator backend registered for language {lang!r}"
        if available:
            detail += f" (registered: {', '.join(sorted(available))})"
        super().__init__(detail)


class BackendError(CrisisScopeError):
    """An embedding or generation backend failed.

    ``index`` points at the offending input within a batch, when known.
    """

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        if index is not None:
            message = f"input {index}: {message}"
        super().__init__(message)
