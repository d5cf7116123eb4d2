"""Exception hierarchy shared by the field, operator, solver and CLI layers."""


class NSRegError(Exception):
    """Base class for every error raised by nsreg."""


class MalformedFieldError(NSRegError):
    """Spectral coefficients do not describe a real field (conjugate symmetry broken)."""


class OutOfBandError(NSRegError):
    """Requested wavenumber lies outside the retained (dealiased) band."""


class SingularModeError(NSRegError):
    """A negative power of A was applied to a field carrying a k = 0 mean."""


class NotAVorticityError(NSRegError):
    """Velocity reconstruction was asked to invert a non-solenoidal field."""


class UndefinedRatioError(NSRegError):
    """A relative residual was requested for a zero reference norm."""


class InvalidExponentError(NSRegError, ValueError):
    """Lebesgue/criterion exponent outside its admissible range."""


class InvalidScalingError(NSRegError, ValueError):
    """Scaling sum leaves no positive time exponent."""


class NormChainViolation(NSRegError):
    """The bounded-domain inequality ||f||_r <= |Omega|^(1/r) ||f||_inf failed."""


class StepRejected(NSRegError):
    """A time step violated the CFL guard.

    ``admissible_dt`` is the largest step the guard would accept for the
    offending state.
    """

    def __init__(self, message: str, admissible_dt: float):
        super().__init__(message)
        self.admissible_dt = admissible_dt


class InsufficientDataError(NSRegError):
    """Trajectory has too few snapshots for the requested diagnostic."""


class TimeRangeError(NSRegError, ValueError):
    """Requested interval is not contained in the trajectory span."""


class CheckpointError(NSRegError):
    """Checkpoint file is truncated or corrupt; ``offset`` locates the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ManifestError(NSRegError):
    """Run manifest is unreadable or references unknown generators/criteria."""
