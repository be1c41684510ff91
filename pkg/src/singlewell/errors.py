"""Exception types shared across the toolkit."""


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance.

    Carries the last iterate so callers can inspect or restart it.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class ResolutionError(ValueError):
    """Mesh too coarse to resolve a constructed feature."""


class VerificationError(RuntimeError):
    """A numerical verification check failed."""
