# Copyright (c) 2026, decide_interference contributors
# For license information, please see license.txt

"""
Error hierarchy for the simulator.
Every class carries the CLI exit code it maps to.
"""


class DecideError(Exception):
    """Base class for all simulator errors"""

    exit_code = 1


class ScenarioValidationError(DecideError, ValueError):
    """An invalid scenario field, unit or document structure"""

    exit_code = 2

    def __init__(self, message, field=None):
        self.field = field
        if field and field not in message:
            message = f"{field}: {message}"
        super().__init__(message)


class NumericalError(DecideError):
    """A numerical procedure could not produce a trustworthy result"""

    exit_code = 3


class ConvergenceError(NumericalError):
    """Quadrature or bracketing/bisection did not converge"""

    def __init__(self, message, bracket=None):
        self.bracket = bracket
        if bracket is not None:
            message = f"{message} (bracket: [{bracket[0]:.6g}, {bracket[1]:.6g}])"
        super().__init__(message)


class GridError(NumericalError):
    """Grid too narrow or too coarse for the represented state"""

    def __init__(self, message, required_width=None):
        self.required_width = required_width
        if required_width is not None:
            message = f"{message} (required width: {required_width:.6g} m)"
        super().__init__(message)


class VisibilityFitError(NumericalError):
    """Fringes are unresolvable or the sinusoidal fit failed"""

    def __init__(self, message, residual=None):
        self.residual = residual
        if residual is not None:
            message = f"{message} (residual: {residual:.3g} of peak density)"
        super().__init__(message)


class InversionError(NumericalError):
    """Requirement inversion cannot proceed on the given bracket"""

    def __init__(self, message, bracket=None, visibilities=None):
        self.bracket = bracket
        self.visibilities = visibilities
        super().__init__(message)


class ProtocolStepError(DecideError):
    """Failure inside one protocol step; keeps the cause's exit code"""

    def __init__(self, step, cause):
        self.step = step
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"{step}: {cause}")


class OutputError(DecideError):
    """Reading a scenario or writing an output failed"""

    exit_code = 4
