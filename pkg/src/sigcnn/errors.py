"""Exception types shared across the package."""


class SigcnnError(ValueError):
    """Base class for all errors raised by this package."""


class LengthError(SigcnnError):
    """A signal or kernel has an unusable length for the requested operation."""


class ZeroEnergyError(SigcnnError):
    """Normalization was requested for a signal with no energy."""


class ShapeError(SigcnnError):
    """Array dimensions do not match the operation's contract."""


class DomainError(SigcnnError):
    """A value is outside the mathematical domain of the operation."""


class ConfigError(SigcnnError):
    """A configuration file, preset, or constructor argument is invalid."""


class TapeMismatchError(SigcnnError):
    """A forward tape does not belong to the network it was replayed against."""
