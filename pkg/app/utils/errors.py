###############################################################################
# ERROR HIERARCHY
# Every failure the library can report, grouped by the CLI exit code it maps to
###############################################################################

from typing import Any, Dict


class SurfaceError(Exception):
    """Base class for all surface library errors"""

    exit_code = 1

    def __init__(self, message: str = '', **details: Any):
        super().__init__(message or self.__class__.__name__)
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error': self.__class__.__name__,
            'message': str(self),
            'exit_code': self.exit_code,
            'details': self.details,
        }


###############################################################################
# INVALID INPUT (exit 3)
###############################################################################

class InvalidMapError(SurfaceError):
    exit_code = 3


class NotInvolution(InvalidMapError):
    pass


class NotPermutation(InvalidMapError):
    pass


class Disconnected(InvalidMapError):
    pass


class NegativeGenus(InvalidMapError):
    pass


class HasBoundary(InvalidMapError):
    pass


class MapFormatError(InvalidMapError):
    pass


class CurveFormatError(InvalidMapError):
    pass


###############################################################################
# CURVE ERRORS (exit 4)
###############################################################################

class CurveError(SurfaceError):
    exit_code = 4


class CurveNotSimple(CurveError):
    pass


class CurvesNotDisjoint(CurveError):
    pass


class IllegalIntersection(CurveError):
    pass


class DegenerateCurve(CurveError):
    pass


###############################################################################
# ALGORITHMIC PRECONDITIONS (exit 4)
###############################################################################

class PreconditionError(SurfaceError):
    exit_code = 4


class NoNoncontractibleCurve(PreconditionError):
    pass


class NotApplicable(PreconditionError):
    pass


class GenusTooSmall(PreconditionError):
    pass


class InitialBoundaryTooLong(PreconditionError):
    pass


class ComponentNotDecomposable(PreconditionError):
    pass


class TangencyPresent(PreconditionError):
    pass


class NotInSplitState(PreconditionError):
    pass


class NotInMergeState(PreconditionError):
    pass


class WrongGenus(PreconditionError):
    pass


class TooFewBoundaries(PreconditionError):
    pass


class NotGenusZeroDecomposition(PreconditionError):
    pass


class ConditionUnsatisfiable(PreconditionError):
    pass


class UnknownFixture(PreconditionError):
    pass


class BudgetExceeded(PreconditionError):
    pass


class SamplingBudgetExceeded(PreconditionError):
    pass


class LedgerViolation(PreconditionError):
    """A proof-ledger inequality failed while bounds were being enforced"""
    pass


class BoundViolation(LedgerViolation):
    """A sweep step broke one of its length or area inequalities"""
    pass


class FaceMeetsItself(PreconditionError):
    """The sweep only moves across faces that do not border themselves"""
    pass


class JobsFailed(PreconditionError):
    pass
