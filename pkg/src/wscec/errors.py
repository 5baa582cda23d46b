"""Exception hierarchy. Everything derives from ``ValueError`` so callers that
only care about "bad input" can catch one thing."""


class WscecError(ValueError):
    pass


class ParameterError(WscecError):
    pass


class FormatError(WscecError):
    """Malformed WFDB header."""


class TruncatedDataError(WscecError):
    """Signal file shorter than the header promises."""


class UnsupportedFormatError(WscecError):
    pass


class ParseError(WscecError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DomainError(WscecError):
    """Matrix outside SPD(n), or an eigenvalue pair that cannot be inverted."""


class UndefinedFeatureError(WscecError):
    pass


class DegenerateEllipseError(WscecError):
    pass


class EvaluationUnavailableError(WscecError):
    pass
