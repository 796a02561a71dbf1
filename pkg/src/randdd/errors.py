"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands act on different numbers of qubits or matrix sizes disagree."""


class ResourceError(ValueError):
    """Requested object would be too large to build densely."""


class DomainError(ValueError):
    """Arguments are outside the domain where an operation is defined."""


class ValidationError(ValueError):
    """Numerical input fails a structural check (e.g. Hermiticity)."""


class ConfigError(ValueError):
    """Invalid configuration; carries the offending line when known."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class NumericalError(RuntimeError):
    """Propagation lost unitarity or otherwise broke down numerically."""
