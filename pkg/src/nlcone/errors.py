"""Exception types shared across the package.

The CLI maps ``ValueError`` subclasses to exit code 2, :class:`ConvergenceError`
to 3 and :class:`InconsistencyError` to 4.
"""


class UnsupportedParameterError(ValueError):
    """Parameters are valid mathematically but outside the supported numerical range."""


class ConvergenceError(RuntimeError):
    """A quadrature or root-finding stage failed to reach its tolerance."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class BracketError(ConvergenceError):
    """No sign change of H could be bracketed."""


class InconsistencyError(RuntimeError):
    """Two independent evaluations of the same quantity disagree."""
