"""Error types raised by depbound.

Errors that signal bad input derive from ``ValueError``; errors that signal a
numerical dead end derive from ``ArithmeticError`` or ``RuntimeError``. The
command line maps the first group to exit status 2 and the second to 3.
"""


class DepboundError(Exception):
    """Base class for all package errors."""

    code = "error"


class OutOfDomain(DepboundError, ValueError):
    code = "out_of_domain"


class EmptySlice(DepboundError, ValueError):
    code = "empty_slice"


class ModelSpecError(DepboundError, ValueError):
    code = "model_spec"


class MeanUndefined(DepboundError, ArithmeticError):
    code = "mean_undefined"


class UndefinedForm(DepboundError, ArithmeticError):
    """An infinity minus infinity combination was produced."""

    code = "undefined_form"


class NonFiniteIntegrand(DepboundError, ArithmeticError):
    code = "non_finite_integrand"


class OptimizerFailed(DepboundError, RuntimeError):
    code = "optimizer_failed"


class BracketFailed(DepboundError, RuntimeError):
    code = "bracket_failed"


class DiscontinuousMarginal(DepboundError, ValueError):
    code = "discontinuous_marginal"


class DegenerateBeta(DepboundError, ValueError):
    code = "degenerate_beta"


class BodyNotConstructible(DepboundError, ValueError):
    code = "body_not_constructible"
