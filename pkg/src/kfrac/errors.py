"""Exception types shared across the package."""


class KfracError(Exception):
    """Base class for all package errors."""


class PoleError(KfracError, ValueError):
    """Gamma-type function evaluated at a nonpositive integer."""


class DivergenceError(KfracError, ArithmeticError):
    """Series or closed form diverges for the requested arguments."""


class NonConvergenceError(KfracError, ArithmeticError):
    """Series did not reach its stopping criterion within the term cap."""


class InvalidExponentError(KfracError, ValueError):
    """Quadrature weight exponent outside (-1, inf)."""


class MaxDepthError(KfracError, ArithmeticError):
    """Adaptive integration exceeded its subdivision depth."""


class NonFiniteError(KfracError, ArithmeticError):
    """An integrand or expression produced NaN or infinity."""


class ParameterDomainError(KfracError, ValueError):
    """Operator parameters violate the admissible region."""


class ParameterConditioningError(KfracError, ArithmeticError):
    """Operator evaluation failed because the kernel is badly conditioned."""


class ExprDomainError(KfracError, ValueError):
    """Expression evaluated outside its domain."""


class ParseError(KfracError, ValueError):
    """Malformed expression text.  ``position`` is the character offset."""

    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class HypothesisViolation(KfracError, ValueError):
    """Inputs to an inequality check do not satisfy the theorem's hypotheses."""


class ConditionClassificationError(KfracError, ValueError):
    """A reversal case matches none of the recognised sign conditions."""


class ConfigError(KfracError, ValueError):
    """Invalid trial configuration."""
