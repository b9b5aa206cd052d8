"""Exception hierarchy shared by all modules.

The CLI maps :class:`ValidationError` to exit code 1 and
:class:`NumericalError` to exit code 2.
"""


class ValidationError(ValueError):
    """Inputs violate a sign, range or shape constraint."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to deliver a trustworthy result."""


class NonConvergenceError(NumericalError):
    pass


class TraceDriftError(NumericalError):
    pass


class DegenerateDenominatorError(NumericalError, ArithmeticError):
    """The scattering denominator vanished (no damping and no coupling)."""


class NoStationaryStateError(ValueError):
    """The cooling rate is not positive, so no stationary distribution exists."""


class TruncationWarning(UserWarning):
    """Population at the top of a truncated ladder exceeds the adequacy bound."""
