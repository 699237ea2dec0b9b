"""Exception hierarchy shared by all modules."""


class GeometryError(Exception):
    """Base class for invalid geometric input or numerical breakdown."""


class ZeroVector(GeometryError):
    pass


class DegenerateSpan(GeometryError):
    pass


class DegenerateConic(GeometryError):
    pass


class HasRealPoints(GeometryError):
    pass


class NotSimultaneouslyDiagonalizable(GeometryError):
    """Numerical failure of the congruence diagonalization (never a mathematical case)."""


class TangentLine(GeometryError):
    pass


class ZeroBase(GeometryError):
    pass


class BranchViolation(GeometryError):
    """The radicand of the norm formula reached the square-root cut."""


class ZeroNorm(GeometryError):
    pass


class InsufficientSamples(GeometryError):
    pass


class OutOfChart(GeometryError):
    pass


class DegenerateContact(GeometryError):
    pass


class NotFlat(GeometryError):
    pass


class HessianSingular(GeometryError):
    pass


class NoConjugatePoint(GeometryError):
    pass


class NonImmersed(GeometryError):
    pass


class StepTooLarge(GeometryError):
    pass
