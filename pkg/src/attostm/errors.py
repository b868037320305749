"""Exception hierarchy shared by the solvers and the CLI."""


class AttostmError(Exception):
    """Base class; carries an optional diagnostics mapping."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConfigError(AttostmError, ValueError):
    """Invalid or inconsistent configuration. ``line`` points into the source file when known."""

    def __init__(self, message, line=None, diagnostics=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, diagnostics)
        self.line = line


class DomainError(AttostmError, ValueError):
    pass


class NumericError(AttostmError, ArithmeticError):
    pass


class QuadratureError(NumericError):
    pass


class PoleError(DomainError):
    pass


class DetectionError(AttostmError):
    pass


class InputError(AttostmError, ValueError):
    pass
