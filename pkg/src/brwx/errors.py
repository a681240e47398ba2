"""Exception types shared across the package."""


class BrwxError(Exception):
    """Base class for package-specific errors."""


class SpecParseError(BrwxError, ValueError):
    """A CLI/config spec string could not be parsed; carries the offending token."""

    def __init__(self, message, token=None):
        super().__init__(message)
        self.token = token


class InvalidRegimeError(BrwxError, ValueError):
    """Scaling sequence does not dominate the weak-limit scale."""


class UnsupportedFamilyError(BrwxError, ValueError):
    """Operation not defined for this displacement family."""


class ContractError(BrwxError, ValueError):
    """Arguments violate a cross-object consistency requirement."""


class ResourceLimitError(BrwxError, RuntimeError):
    """A work budget (node visits, retries, enumeration size) was exhausted.

    ``partial`` may carry whatever statistics were gathered before the abort.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
