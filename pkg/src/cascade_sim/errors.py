"""Exception and warning types shared across the package."""


class CascadeSimError(Exception):
    """Base class for errors raised by cascade_sim."""


class InvalidParameterError(CascadeSimError, ValueError):
    """A physical parameter or configuration value is out of range."""


class NumericFailureError(CascadeSimError, RuntimeError):
    """An ODE integration failed (step underflow or step budget exhausted).

    The ``time`` attribute holds the integration time at which the failure
    occurred, when known.
    """

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class DegenerateSynthesisError(NumericFailureError):
    """Pulse synthesis hit a vanishing denominator (receiver amplitude -> 0)."""


class SynthesisInconsistencyError(CascadeSimError, RuntimeError):
    """Pulse synthesis produced a non-finite coupling value."""


class PulseDomainError(CascadeSimError, ValueError):
    """A pulse was evaluated outside the time window it is defined on."""


class ConfigError(InvalidParameterError):
    """A config file or CLI value could not be parsed.  Names the field."""

    def __init__(self, field, message):
        super().__init__(f"invalid value for '{field}': {message}")
        self.field = field


class AdiabaticityWarning(UserWarning):
    """Raman detuning is not large compared to drive and vacuum coupling."""


class TruncationWarning(UserWarning):
    """Synthesized pulse has not decayed below threshold at the window edge."""
