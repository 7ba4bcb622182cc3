"""Exception hierarchy shared by all weylsim modules."""


class WeylsimError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(WeylsimError, ValueError):
    """A physical or numerical parameter violates its contract."""


class UnitKindError(WeylsimError, ValueError):
    """A quantity was converted against the wrong unit kind."""


class GridError(WeylsimError, ValueError):
    """A grid definition violates its invariants."""


class TruncationError(WeylsimError):
    """A grid or basis is too small to hold the requested state."""


class TruncationExceededError(TruncationError):
    """Fock-space population leaked into the truncation guard levels."""


class SingularPointError(WeylsimError):
    """The helicity factor was requested at the momentum origin."""


class QuadratureError(WeylsimError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Carries the achieved error estimate in ``estimate``.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class FitError(WeylsimError):
    """A least-squares fit was degenerate or under-determined."""


class ConfigurationError(WeylsimError, ValueError):
    """An ion/beam configuration is inconsistent."""


class ProtocolError(WeylsimError, ValueError):
    """A measurement record violates the readout protocol contract."""


class WindowingError(WeylsimError):
    """Too little density mass inside the reconstruction window."""


class ConfigError(WeylsimError, ValueError):
    """An experiment configuration file failed to parse or validate.

    ``location`` identifies the offending section/key when known.
    """

    def __init__(self, message, location=None):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location
