"""Exception and warning classes raised across the package."""


class TwoPulseError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(TwoPulseError, ValueError):
    pass


class IntegrationError(TwoPulseError, RuntimeError):
    """A Bloch sweep hit a non-finite field sample.

    ``index`` is the position on the time axis where the bad sample sits.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ResolutionError(TwoPulseError, RuntimeError):
    """A propagation step changed the fields too much to be trusted."""

    def __init__(self, message, z=None):
        super().__init__(message)
        self.z = z


class UnsupportedProtoError(TwoPulseError, ValueError):
    pass


class DegenerateInversionError(TwoPulseError, ValueError):
    pass


class NotSinglePulseError(TwoPulseError, ValueError):
    pass


class ConfigError(TwoPulseError, ValueError):
    """Configuration text failed validation.

    All violations found are kept in ``violations``.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class PulseTruncationWarning(UserWarning):
    pass
