class FlexMatchError(Exception):
    """Base class for all errors raised by flexmatch."""


class InvalidParams(FlexMatchError, ValueError):
    pass


class DomainError(FlexMatchError, ValueError):
    pass


class HypothesisViolated(FlexMatchError, ValueError):
    """A closed-form solver was called outside the regime where its root is unique."""


class UnimodularityViolation(FlexMatchError, ValueError):
    pass


class InvalidLaw(FlexMatchError, ValueError):
    pass


class DenseRegime(FlexMatchError, ValueError):
    """Some connection rate exceeds n, so c/n is not a probability."""


class TooLarge(FlexMatchError, ValueError):
    pass


class DegenerateRatio(FlexMatchError, ArithmeticError):
    pass


class NoConvergence(FlexMatchError, ArithmeticError):
    pass
