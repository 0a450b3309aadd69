"""Exception types raised by the simulator."""


class TrapDacError(Exception):
    """Base class for all domain errors in this package."""


class MalformedFrameError(TrapDacError):
    """Bitstring cannot be decoded into a programming frame."""


class OverclockError(TrapDacError):
    """Bus clock exceeds the rate at which conversion stays reliable."""


class CalibrationRejectedError(TrapDacError):
    """Measured sweep is too non-monotone to invert; channel unusable."""


class OutOfRangeError(TrapDacError):
    """Requested voltage is not achievable on this channel.

    Carries the nearest achievable voltage so planners can report how far
    off the request was.
    """

    def __init__(self, message: str, nearest_v: float | None = None):
        super().__init__(message)
        self.nearest_v = nearest_v


class InfeasibleRateError(TrapDacError):
    """Heating rate below the anomalous baseline has no noise solution."""


class ScheduleGapError(TrapDacError):
    """Switch schedule does not cover the requested simulation window."""


class ConfigError(TrapDacError):
    """Scenario config file failed to parse or validate."""
