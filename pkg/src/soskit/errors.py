"""Exception hierarchy shared by the library and the CLI."""


class SoskitError(Exception):
    """Base class for all soskit errors."""


class DegreeMismatch(SoskitError, ValueError):
    pass


class ArityMismatch(SoskitError, ValueError):
    pass


class OddDegree(SoskitError, ValueError):
    pass


class NotSymmetric(SoskitError, ValueError):
    pass


class IndexOutOfBasis(SoskitError, KeyError):
    pass


class KOutOfRange(SoskitError, ValueError):
    pass


class SubsetExplosion(SoskitError, RuntimeError):
    """Too many k-subsets to enumerate under the configured cap."""


# the solver reports the same condition under its own name
SupportExplosion = SubsetExplosion


class WrongShape(SoskitError, ValueError):
    pass


class ParseError(SoskitError, ValueError):
    pass


class BlockNotPsd(SoskitError, ValueError):
    pass


class RoundingFailed(SoskitError, RuntimeError):
    pass


class NoWitnessFound(SoskitError, RuntimeError):
    pass


class ConstructionError(SoskitError, ValueError):
    """Invalid parameters for one of the named constructions."""


class OddSum(ConstructionError):
    pass


class NonIntegralBarycenter(ConstructionError):
    pass


class LambdaSumNotOne(ConstructionError):
    pass


class OddAlpha(ConstructionError):
    pass


class ShapeError(ConstructionError):
    pass


class MonomialCollision(ConstructionError):
    pass


class TooManyTerms(ConstructionError):
    pass


class ConstraintViolation(ConstructionError):
    pass


class DegenerateG(ConstructionError):
    pass


class NotBinary(SoskitError, ValueError):
    pass


class ZeroForm(SoskitError, ValueError):
    pass


class DualityViolation(SoskitError, AssertionError):
    """Both a verified certificate and a verified witness were produced."""
