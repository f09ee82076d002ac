"""Exception hierarchy shared by the library layers and the CLI."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested function."""


class SeparationError(DomainError):
    """The two arguments of the fundamental solution have (nearly) equal radii.

    The addition-theorem series converges only for ``|x| != |y|``; pairs whose
    radius ratio exceeds ``1 - delta`` are refused instead of summed slowly.
    """

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class ConfigError(ValueError):
    """An experiment configuration is malformed or violates an invariant."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class SingularSystemError(ArithmeticError):
    """A square collocation system is numerically rank deficient."""
