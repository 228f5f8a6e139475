"""Exception and warning types shared across the package."""


class SU2SynthError(Exception):
    """Base class. ``code`` is a short machine-readable tag."""

    code = "ERROR"


class InvalidInputError(SU2SynthError, ValueError):
    code = "INVALID_INPUT"


class BadResolutionError(InvalidInputError):
    code = "BAD_RESOLUTION"


class NearBranchError(InvalidInputError):
    code = "NEAR_BRANCH"


class EmptyTargetError(InvalidInputError):
    code = "EMPTY_TARGET"


class OutOfGridError(InvalidInputError):
    code = "OUT_OF_GRID"


class OnTargetError(InvalidInputError):
    code = "ON_TARGET"


class WrongDirectionError(InvalidInputError):
    code = "WRONG_DIRECTION"


class NumericalError(SU2SynthError, ArithmeticError):
    code = "NUMERICAL"


class NaNDetectedError(NumericalError):
    code = "NAN_DETECTED"


class UnreachableError(NumericalError):
    code = "UNREACHABLE"


class UnreachedError(NumericalError):
    code = "UNREACHED"


class NonTerminalTrajectoryError(NumericalError):
    code = "NON_TERMINAL_TRAJECTORY"


class BranchSingularityWarning(RuntimeWarning):
    """log_map was asked for the chart coordinates of -I."""
