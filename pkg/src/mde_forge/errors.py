"""Exception hierarchy.

Two families matter to callers: :class:`ParameterError` (bad or degenerate
inputs, including an unsolvable algebraic system) and :class:`NumericFailure`
(contour, inversion or path problems at evaluation time).  The CLI maps them
to exit codes 2 and 3.
"""


class MdeForgeError(Exception):
    """Base class for all package errors."""


class ParameterError(MdeForgeError, ValueError):
    pass


class NumericFailure(MdeForgeError, ArithmeticError):
    pass


class InvalidArgument(ParameterError):
    pass


class UnsupportedWeight(ParameterError):
    pass


class InvalidParams(ParameterError):
    pass


class InvalidAnsatz(ParameterError):
    pass


class DivergentWeight(ParameterError):
    pass


class NoPolynomialSolution(ParameterError):
    """Raised when D_k(a, b, c) = 0, i.e. the residue system has no solution."""


class SingularConfiguration(ParameterError):
    pass


class MultipleRootError(ParameterError):
    pass


class EvaluationFailure(NumericFailure):
    pass


class InvalidContour(NumericFailure):
    pass


class PoleOnContour(NumericFailure):
    pass


class InversionFailure(NumericFailure):
    pass


class LiftFailure(NumericFailure):
    pass


class InvalidPoint(NumericFailure):
    pass


class PathFailure(NumericFailure):
    pass


class CertificationFailure(NumericFailure):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InsufficientPrecisionWarning(UserWarning):
    pass
