"""Exception hierarchy; the CLI maps these onto its exit codes."""


class ShapeRegError(Exception):
    """Base class for all package errors."""


class InvalidArgument(ShapeRegError, ValueError):
    """An argument is outside the operation's domain."""


class InfeasibleError(InvalidArgument):
    """Hyperparameters cannot be honoured for the given data (e.g. k > n)."""


class ConfigError(ShapeRegError):
    """A configuration document is malformed or uses an unknown schema."""
