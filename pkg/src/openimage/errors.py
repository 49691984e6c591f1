"""Exception hierarchy shared by every module."""


class OpenImageError(Exception):
    """Base class for all errors raised by this package."""


class NonUnit(OpenImageError):
    pass


class BadValuation(OpenImageError):
    pass


class HypothesisFails(OpenImageError):
    """A stated hypothesis is certifiably false for the given input."""


class PrecisionExhausted(OpenImageError):
    """The working precision is too small to decide or certify the answer."""


class OddTrace(OpenImageError):
    pass


class SpanTooSmall(OpenImageError):
    pass


class DegenerateProjection(OpenImageError):
    pass


class Degenerate(OpenImageError):
    pass


class NonSquareDet(OpenImageError):
    pass


class BranchAmbiguity(OpenImageError):
    pass


class SizeCapExceeded(OpenImageError):
    pass


class SideConditionViolated(OpenImageError):
    pass


class IncomparableRepresentations(OpenImageError):
    pass


class PreconditionError(OpenImageError):
    pass


class Falsified(OpenImageError):
    """A guaranteed congruence or inequality failed on a concrete instance.

    Raised instead of returning a wrong answer; carries enough context in the
    message to reproduce the instance.
    """
