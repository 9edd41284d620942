"""Exception types raised across the package."""


class CaventError(Exception):
    """Base class for all package errors."""


class NumericalError(CaventError, ArithmeticError):
    """A computation failed for numerical reasons (CLI exit code 3)."""


class NotHermitian(CaventError, ValueError):
    pass


class Singular(NumericalError):
    pass


class StepUnderflow(NumericalError):
    pass


class DimensionMismatch(CaventError, ValueError):
    pass


class ZeroDetuning(CaventError, ValueError):
    pass


class UnequalEpsilons(CaventError, ValueError):
    pass


class DegenerateRatio(CaventError, ValueError):
    pass


class NonUniformCoupling(CaventError, ValueError):
    pass


class InvalidDensityMatrix(CaventError, ValueError):
    pass


class PositivityViolation(NumericalError):
    pass


class NonUniqueSteadyState(NumericalError):
    pass


class NoDissipation(CaventError, ValueError):
    pass


class NotConverged(NumericalError):
    pass


class SubspaceLeak(CaventError, ValueError):
    pass


class EmptySeries(CaventError, ValueError):
    pass


class UnknownScenario(CaventError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown scenario"


class InvalidOverride(CaventError, ValueError):
    pass
