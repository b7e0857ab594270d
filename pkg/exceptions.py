"""
Error hierarchy for the Transversality Lab.

Input and precondition problems derive from ValueError, failed computations and
violated contracts from RuntimeError, so callers can keep catching the builtins.
"""


class EmptyDomainError(ValueError):
    """A linear map with a zero-dimensional source (or target, for MS)."""

    def __init__(self, message="empty domain"):
        super().__init__(message)


class DimensionMismatchError(ValueError):
    pass


class MissingComplexStructureError(ValueError):
    pass


class DegenerateSliceError(ValueError):
    """The defining polynomial vanishes identically on the slice."""

    def __init__(self, message="degenerate slice"):
        super().__init__(message)


class UnsupportedSliceError(ValueError):
    pass


class SliceDisagreementError(RuntimeError):
    """Component counts disagree between grid resolutions."""


class OverlappingBallsError(ValueError):
    pass


class NoRelationError(RuntimeError):
    def __init__(self, message="no relation at this degree"):
        super().__init__(message)


class NoFarPointError(RuntimeError):
    pass


class NoGoodValueError(RuntimeError):
    def __init__(self, message="no good value found"):
        super().__init__(message)


class NetTooLargeError(ValueError):
    def __init__(self, message="net too large"):
        super().__init__(message)


class NetSpacingError(ValueError):
    pass


class ScheduleError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class ContractViolationError(RuntimeError):
    """A postcondition check failed; `probe` holds the offending point when known."""

    def __init__(self, message, probe=None, stage=None):
        super().__init__(message)
        self.probe = probe
        self.stage = stage


class FixpointError(RuntimeError):
    pass


class ReplayError(ValueError):
    pass


class ConfigError(ValueError):
    pass
