"""Exception types shared across the package."""


class CnomaError(Exception):
    """Base class for all package errors."""


class ValidationError(CnomaError, ValueError):
    """A configuration violates one of its invariants."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class InfeasibleErrorVariance(ValidationError):
    """The estimation-error variance of a link is not below its channel variance."""

    def __init__(self, link, err_sigma_sq, sigma_sq):
        self.link = link
        self.err_sigma_sq = err_sigma_sq
        self.sigma_sq = sigma_sq
        super().__init__(
            f"link{link}",
            f"error variance {err_sigma_sq:.6g} >= channel variance {sigma_sq:.6g}",
        )


class ParseError(CnomaError, ValueError):
    """A configuration file could not be parsed."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip())


class ToleranceNotReached(CnomaError, ArithmeticError):
    """Adaptive quadrature hit its refinement limit before meeting the tolerance.

    The best available estimate is kept on the exception.
    """

    def __init__(self, value, error, target):
        self.value = value
        self.error = error
        self.target = target
        super().__init__(
            f"quadrature error estimate {error:.3g} exceeds target {target:.3g} "
            f"(best value {value:.12g})"
        )


class DegenerateFit(CnomaError, ValueError):
    """Slope fitting input carries no usable trend."""
