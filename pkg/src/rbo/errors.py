"""Exception hierarchy shared by every module."""


class RBOError(Exception):
    """Base class for all errors raised by this package."""


class InvalidWidthError(RBOError, ValueError):
    """A bit width is outside the supported range."""


class ShapeError(RBOError, ValueError):
    """A key sequence does not have power-of-two length."""


class OrderError(RBOError, ValueError):
    """A key sequence is not sorted ascending."""


class UsageError(RBOError, RuntimeError):
    """An operation was called with arguments that violate its contract."""


class ConfigError(RBOError, ValueError):
    """A sweep or CLI configuration is invalid."""
