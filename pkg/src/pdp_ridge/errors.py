"""Exception types raised across the package."""


class PdpRidgeError(Exception):
    """Base class for all errors raised by pdp_ridge."""


class ValidationError(PdpRidgeError, ValueError):
    """Input violates a domain invariant (feature/label range, weights, ...)."""


class DimensionMismatch(ValidationError):
    pass


class InvalidBudget(ValidationError):
    """A privacy budget is non-positive, non-finite or implausibly large."""


class NumericalFailure(PdpRidgeError, RuntimeError):
    """A linear-algebra routine failed on a system that should be well posed."""


class EmptySubsample(PdpRidgeError):
    """Jorgensen sampling kept zero points."""


class EmptySplit(ValidationError):
    pass


class MalformedCsv(ValidationError):
    pass


class DegenerateColumn(ValidationError):
    """A numeric column has min == max so min-max scaling is undefined."""


class PlanInvalid(ValidationError):
    pass
