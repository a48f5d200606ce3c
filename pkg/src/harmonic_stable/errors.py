"""Exception hierarchy.

Parameter and domain problems derive from ``ValueError``; numerical failures
(truncation, non-convergence) derive from ``ArithmeticError`` so callers such
as the CLI can map them to distinct exit codes.
"""


class ParameterError(ValueError):
    """A parameter lies outside its admissible range."""


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class PoleError(DomainError):
    """Evaluation requested exactly at a pole."""


class UnlearnableError(ParameterError):
    """Overlap configuration in which the true concept cannot be learned."""


class MultiplicityError(DomainError):
    """An operation needing a simple eigenvalue received a repeated one."""


class StateError(RuntimeError):
    """An object was used before a required preparation step."""


class NumericalError(ArithmeticError):
    """Base class for numerical failures."""


class TruncationError(NumericalError):
    """A Fourier integral could not be truncated to the requested accuracy."""


class ConvergenceError(NumericalError):
    """An iterative procedure failed to reach its tolerance."""
