"""Exception types raised by dataeff."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateCutoffError(DomainError):
    """The CPA cutoff gain has CDF 1, so transmission never happens."""


class RegimeError(ValueError):
    """A coherence-time regime assumption was violated."""


class ResourceError(RuntimeError):
    """A simulation would exceed its resource bound."""


class ConvergenceError(ArithmeticError):
    """An iterative numeric routine hit its iteration cap."""
