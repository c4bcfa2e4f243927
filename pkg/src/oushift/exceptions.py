"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the effective domain of a function."""


class PreAsymptoticError(ArithmeticError):
    """The horizon T is too small for a large-T quantity to exist.

    Raised for instance when the Gaussian moment generating function is
    infinite at the requested tilt, or when the implicit tilt equation has
    no bracketed root yet.
    """


class DegeneratePathError(ValueError):
    """A path whose empirical variance vanishes, so the estimators are undefined."""


class ConsistencyError(ArithmeticError):
    """Two independent computations of the same quantity disagree."""
