"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class FeedbackQueueError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class InvalidParameterError(FeedbackQueueError, ValueError):
    exit_code = 2


class ThresholdUnboundedError(FeedbackQueueError):
    """The equilibrium scan hit ``x_max`` with joining still profitable."""

    exit_code = 3


class NumericalFailureError(FeedbackQueueError, ArithmeticError):
    exit_code = 4

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
