"""Exception hierarchy shared by all lcgeom modules."""


class LcGeomError(Exception):
    """Base class for every error raised by lcgeom."""


class DomainError(LcGeomError, ValueError):
    """A point lies outside the interior of the effective domain."""


class GridError(LcGeomError, ValueError):
    """A tabulated function cannot support the requested operation."""


class IntegrabilityError(LcGeomError, ValueError):
    """The log-concave weight is not integrable (or has zero mass)."""


class NumericalError(LcGeomError, ArithmeticError):
    """A quadrature failed to converge or produced non-finite values."""


class ConditionError(LcGeomError, ValueError):
    """A generator fails a hypothesis required by an inequality."""


class ConstructionError(LcGeomError, ValueError):
    """A body or function descriptor violates its invariants."""


class ParameterError(LcGeomError, ValueError):
    """An operation was called with an excluded parameter value."""


class DivergenceError(LcGeomError, ArithmeticError):
    """An iterative solver diverged."""


class SamplingError(LcGeomError, RuntimeError):
    """A sampler could not produce draws efficiently."""


class ConfigError(LcGeomError, ValueError):
    """A scenario configuration violates the schema."""
