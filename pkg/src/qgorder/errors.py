"""Exception hierarchy shared by all qgorder modules."""


class QGError(Exception):
    """Base class for every error raised by qgorder."""


class ConstraintViolation(QGError, ValueError):
    """Ordering exponents do not satisfy j1 + j2 + j3 = 1."""


class DomainError(QGError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation at a pole of a special function."""


class NoConvergence(QGError, ArithmeticError):
    """A series or iteration hit its term limit before converging."""


class RepresentationMismatch(QGError, ValueError):
    """A wave function is tagged with the wrong representation."""


class IncompatibleOrderings(QGError, ValueError):
    """Two orderings with different J+ cannot be conjugated into each other."""


class RegimeError(QGError, ValueError):
    """Operation not available for the ordering's |J+| regime."""


class WrongRegime(RegimeError):
    """Boundary-parameter dictionary used away from |J+| = 1/2."""


class Unsupported(QGError, NotImplementedError):
    """Parameter combination deliberately left unsupported (e.g. Robin beta < 0)."""


class MethodMismatch(QGError, ValueError):
    """Kinetic method incompatible with the boundary condition."""


class ExtrapolationUnstable(QGError, ArithmeticError):
    """Boundary Wronskian does not settle as y -> 0."""


class FitDegenerate(QGError, ArithmeticError):
    """Asymptotic fit window cannot separate the two branches."""


class BasisTooSmall(QGError, ValueError):
    """State has too much weight outside the truncated spectral basis."""
