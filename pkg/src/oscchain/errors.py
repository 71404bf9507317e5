"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`ChainError`.
The two intermediate classes decide the CLI exit code: validation problems
exit with 2, numerical guard violations (positivity, spectral gap,
resonance) exit with 3.
"""


class ChainError(Exception):
    """Base class for all package errors."""


class ValidationError(ChainError):
    """Malformed input: bad sizes, bad config, too few samples."""


class NumericalGuard(ChainError):
    """A mathematical precondition of the model does not hold."""


# lattice
class PositivityViolation(NumericalGuard):
    def __init__(self, message, lam=None, value=None):
        super().__init__(message)
        self.lam = lam
        self.value = value


class DegenerateSupport(ValidationError):
    pass


class TooSmall(ValidationError):
    pass


# force
class EmptyMeasure(ValidationError):
    pass


class GapViolation(NumericalGuard):
    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


# operators
class NotPositiveDefinite(NumericalGuard):
    pass


# stationary analysis
class InsideSpectrum(NumericalGuard):
    pass


class RootOnCircle(NumericalGuard):
    pass


class RepeatedRoot(NumericalGuard):
    pass


class DegenerateWindow(ValidationError):
    pass


# simulation
class Resonance(NumericalGuard):
    pass


class BoundaryUnsupported(ValidationError):
    pass


class MismatchedRuns(ValidationError):
    pass


# statistics
class TooFew(ValidationError):
    pass


class DegenerateVariance(ValidationError):
    pass


class ConfigError(ValidationError):
    pass
