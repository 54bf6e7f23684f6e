"""Exception types shared across the package."""


class SpinPulseError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SpinPulseError):
    """Malformed or inconsistent run configuration."""


class AmbiguousTransitionError(SpinPulseError):
    """Two spins compete for the same drive frequency.

    Raised when more than one single-spin transition of a basis state falls
    inside the near-resonant window of a pulse, so the two-level reduction
    is not well defined.  Cannot happen when the Larmor spacing is large
    compared to the coupling.
    """


class QubitCapError(SpinPulseError):
    """Requested chain size exceeds the solver's hard cap."""


class IntegrationStepError(SpinPulseError):
    """Classical integrator step too large: norm drift exceeded tolerance."""
