class MeraKitError(Exception):
    """Base class for all exceptions raised by mera-kit."""

    pass


class UsageErrorMixin:
    """Marks errors caused by caller input rather than by the numerics."""


class ArgumentError(MeraKitError, UsageErrorMixin, ValueError):
    """Raised when an argument is out of its admissible range."""


class ShapeError(MeraKitError, ValueError):
    """Raised when tensor dimensions do not match."""


class StructureError(MeraKitError):
    """Raised when a network, layer or cone is structurally inconsistent."""


class ValidationError(MeraKitError):
    """Raised when a numerical invariant (Hermiticity, positivity, trace) is violated."""


class CostGuardError(MeraKitError, UsageErrorMixin):
    """Raised when a computation would exceed one of the configured cost guards."""


class CapabilityError(MeraKitError):
    """Raised when an operation needs data the network does not carry."""


class DegenerateSignalError(MeraKitError):
    """Raised when a fit has no usable signal."""


class ConfigurationError(MeraKitError, UsageErrorMixin, ValueError):
    """Raised when the configuration is invalid."""


class LoadError(MeraKitError):
    """Raised when a document cannot be turned into a network."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
