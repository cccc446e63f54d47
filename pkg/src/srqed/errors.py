"""Exception types shared across the package."""


class SrqedError(Exception):
    """Base class for all package errors."""


class InputError(SrqedError, ValueError):
    """An argument violates an operation's precondition."""


class DomainError(InputError):
    """A closed-form expression is undefined at the requested point."""


class ConfigError(SrqedError):
    """A scenario configuration is malformed or fails schema validation."""


class NumericalError(SrqedError, RuntimeError):
    """A computation produced non-finite or otherwise unusable numbers."""


class ProtocolConstraintError(SrqedError, ValueError):
    """A gate schedule cannot satisfy its timing conditions."""
