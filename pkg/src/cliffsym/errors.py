"""Exception hierarchy shared by the whole package.

Three CLI exit classes map onto this hierarchy: usage errors (bad input text,
unknown suite names), mathematical domain errors (preconditions of an
operation violated by the data), and non-convergence of an iterative or
adaptive scheme.
"""


class CliffSymError(Exception):
    """Base class for all package errors."""


class UsageError(CliffSymError):
    """Malformed user input (expression text, suite names, bad flags)."""


class MathDomainError(CliffSymError):
    """Input data violates a mathematical precondition."""


class ConvergenceError(CliffSymError):
    """An adaptive or iterative scheme failed to reach its tolerance."""


# -- usage -------------------------------------------------------------

class ExprSyntaxError(UsageError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class NestedSymError(UsageError):
    """sym(...) blocks may not nest; the outer block already symmetrizes."""


class IndexOutOfRange(UsageError):
    """Basis index exceeds the algebra dimension."""


class UnknownSuite(UsageError):
    pass


# -- math domain -------------------------------------------------------

class AlgebraMismatch(MathDomainError):
    """Operands belong to different algebras (dimension or scalar field)."""


class ZeroParavector(MathDomainError):
    """Inversion of the zero paravector requested."""


class NotInvertible(MathDomainError):
    pass


class LimitExceeded(MathDomainError):
    """Factorial-size enumeration beyond the configured hard limit."""


class Divergent(MathDomainError):
    """Series evaluation outside its convergence domain."""


class SingularPath(MathDomainError):
    """An integration path passes through a non-invertible element."""


class SingularOnSimplex(SingularPath):
    """The integrand has a pole on the integration simplex."""


class SingularOnPath(SingularPath):
    """The integrand has a pole on a contour or loop path."""


class EigenvalueOutsideContour(MathDomainError):
    pass


class DuplicateNodes(MathDomainError):
    """Interpolation nodes must have invertible pairwise differences."""


# -- convergence -------------------------------------------------------

class QuadratureNotConverged(ConvergenceError):
    pass
